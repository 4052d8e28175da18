// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances and trial counts are fixed here, not taken from flags.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "astars/astars.hpp"
#include "astars/cli.hpp"

using namespace astars;

namespace {

struct Verdict {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    passed = passed && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "[x] ") << what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

const cli::CannedFigure& figure(std::string_view name) { return *cli::find_figure(name); }

// Angle between a unit vector and a line, robust near zero.
double line_angle(const Vector& v, const Vector& w) {
  const Vector wn = w.normalized();
  const double c = std::abs(v.dot(wn));
  const double s = (v - v.dot(wn) * wn).norm();
  return std::atan2(s, c);
}

// 1. Hyperparameter formulas against 30-digit reference evaluations.
void hyperparameters(Verdict& v) {
  constexpr double kRel = 1e-6;
  const auto close = [](double a, double b) { return std::abs(a - b) <= kRel * std::abs(b); };
  const Hyperparameters full = compute_hyperparameters(1e-4, 2.0, 20, NoiseKind::Additive);
  v.require(close(full.mu, 0.0218416270341052111), "mu*(P=20) = " + num(full.mu));
  v.require(close(full.h, 1.0 / 192.0), "h(P=20) = " + num(full.h));
  const Hyperparameters act = active_hyperparameters(1e-4, 2.0, 1, NoiseKind::Additive);
  v.require(close(act.mu, 0.0276333774323952758), "mu_A(j=1) = " + num(act.mu));
  v.require(close(act.h, 0.025), "h_A(j=1) = " + num(act.h));
}

// 2 and 8. Monte Carlo bound suites.
void bounds(Verdict& v, std::initializer_list<std::string_view> suites) {
  for (auto s : suites) {
    for (const BoundCheck& c : validate_bounds(s).checks) {
      v.require(c.passed, c.name + " = " + num(c.value) + " in [" + num(c.lower) + ", " +
                              num(c.upper) + "]");
    }
  }
}

// 3. Subspace recovery on Example 1.
void subspace_recovery(Verdict& v) {
  const BenchmarkProblem pb = make_problem("ex1");
  const Vector w = pb.exact_active_basis->col(0);
  constexpr int kRuns = 50;
  int hits = 0;
  std::size_t min_ledger = std::numeric_limits<std::size_t>::max();
  std::vector<double> cosines;
  for (int run = 0; run < kRuns; ++run) {
    FaastarsConfig cfg;
    cfg.maxit = 800;
    cfg.surrogate = SurrogateKind::Quadratic;
    cfg.tau = 0.95;
    cfg.sigma2_override = pb.noise.sigma2;
    cfg.l1_override = pb.l1;
    NoisyOracle oracle = pb.make_oracle();
    RngStream rng(3003, static_cast<std::uint64_t>(run));
    SampleLedger ledger;
    const Point x0 = pb.initial_iterate(rng);
    const Phase1Result ph1 = phase1_learn(oracle, x0, rng, ledger, cfg);
    const Phase2Result ph2 = phase2_burnin(oracle, x0, ph1, cfg, rng, ledger);
    min_ledger = std::min(min_ledger, ledger.size());
    if (ph2.state.diverged) {
      continue;
    }
    const double c = std::abs(ph2.learned.subspace.basis().col(0).dot(w.normalized()));
    cosines.push_back(c);
    hits += ph2.learned.subspace.dim() == 1 && c >= 0.99;
  }
  v.require(min_ledger >= 231, "ledger >= 231 samples (min " + std::to_string(min_ledger) + ")");
  v.require(hits >= 40, "j=1 and |cos| >= 0.99 in " + std::to_string(hits) + "/50 (need 40)");
  v.detail << " (median |cos| " << num(quantile(cosines, 0.5)) << ")";

  // analytic gradients at standard normal points
  RngStream rng(3004, 0);
  std::vector<Vector> grads;
  for (int i = 0; i < 500; ++i) {
    grads.push_back(pb.gradient(rng.standard_normal(pb.dim)));
  }
  const ActiveSubspace as = make_active_subspace(build_sensitivity(grads), 0.95);
  const double angle = line_angle(as.basis().col(0), w);
  v.require(as.dim() == 1 && angle <= 1e-10, "analytic j=" + std::to_string(as.dim()) +
                                                 ", angle " + num(angle) + " <= 1e-10");
}

// 4. ASTARS <= FAASTARS <= 1.2 STARS at the STARS evaluation budget.
void ordering(Verdict& v) {
  for (auto name : {"fig1", "fig2"}) {
    const auto& fig = figure(name);
    const auto batches = cli::run_figure(fig, fig.trials, fig.maxit, jobs());
    const std::size_t budget = 1 + 2 * fig.maxit;
    double med[3];
    for (int i = 0; i < 3; ++i) {
      med[i] = median_at_budget(batches[static_cast<std::size_t>(i)].trials, budget);
    }
    const double stars = med[0], astars = med[1], faastars = med[2];
    const std::string tag = std::string(fig.problem) + ": stars " + num(stars) + ", astars " +
                            num(astars) + ", faastars " + num(faastars);
    v.require(astars <= faastars && faastars <= 1.2 * stars, tag);
  }
}

// 5. Example 3 minimum.
void known_minimum(Verdict& v) {
  const auto& fig = figure("fig3");
  const BenchmarkProblem pb = make_problem(fig.problem);
  const TrialBatch b =
      run_trials(pb, cli::algorithm_for(fig.series[1]), 25, 7500, fig.seed, jobs());
  const double f = b.summary.final_median_f();
  v.require(std::abs(f - *pb.f_star) <= 1e-2,
            "median final f " + num(f) + " vs f* " + num(*pb.f_star) + " (tol 1e-2)");
}

// 6. Scaled-Lipschitz asymmetry on the sphere.
void scaled_lipschitz(Verdict& v) {
  const auto& fig = figure("fig4");
  const auto batches = cli::run_figure(fig, 100, 2000, jobs());
  const double c01 = batches[0].summary.final_median_f();
  const double c1 = batches[2].summary.final_median_f();
  const double c4 = batches[3].summary.final_median_f();
  v.require(c4 > c1, "c=4 " + num(c4) + " > c=1 " + num(c1));
  v.require(c01 > c1, "c=0.1 " + num(c01) + " > c=1 " + num(c1));
  const std::size_t ok = batches[1].summary.completed;
  v.require(ok >= 90, "c=0.2 completed " + std::to_string(ok) + "/100 (need 90)");
}

// 7. Flat-lining with a fixed learned dimension on Example 5.
void flat_lining(Verdict& v) {
  const auto& fig = figure("fig5");
  const auto batches = cli::run_figure(fig, 25, 5000, jobs());
  const double stars = batches[0].summary.final_median_f();
  for (std::size_t i : {1u, 2u}) {
    const double f = batches[i].summary.final_median_f();
    v.require(f >= 10.0 * stars, std::string(fig.series[i].label) + " " + num(f) +
                                     " >= 10 x stars " + num(stars) + " (ratio " +
                                     num(f / stars) + ")");
  }
}

// 9. Noise and Lipschitz learning.
void learning(Verdict& v) {
  const BenchmarkProblem pb = make_problem("ex1");
  int hits = 0;
  for (std::uint64_t run = 0; run < 200; ++run) {
    RngStream rng(9009, run);
    NoisyOracle oracle = pb.make_oracle();
    SampleLedger ledger;
    const Point x0 = pb.initial_iterate(rng);
    const auto r = ecnoise(oracle, x0, rng.unit_vector(pb.dim), 0.01, 8, rng, ledger);
    const double ratio = r.estimate.sigma2_hat / pb.noise.sigma2;
    hits += ratio >= 0.25 && ratio <= 4.0;
  }
  v.require(hits >= 160, "ECNoise within x4 in " + std::to_string(hits) + "/200 (need 160)");
  const std::vector<double> line{0.0, 0.1 * 0.1, 0.2 * 0.2};
  const double l1 = l1_init(line, 0.1).l1_hat;
  v.require(l1 == 2.0, "l1_init on x^2 = " + num(l1));
}

// 10. Accounting identity and bitwise reproducibility.
void accounting(Verdict& v) {
  std::size_t runs = 0;
  std::size_t bad = 0;
  for (const auto& id : problem_ids()) {
    ProblemOverrides ov;
    if (id == "ex5") {
      ov.active_dim = 2;  // gives ASTARS a known subspace
    }
    const BenchmarkProblem pb = make_problem(id, ov);
    std::vector<AlgorithmSpec> specs{AlgorithmSpec{Algorithm::Stars},
                                     AlgorithmSpec{Algorithm::Stars, HyperMode::Estimated},
                                     AlgorithmSpec{Algorithm::Astars}};
    AlgorithmSpec fa{Algorithm::Faastars};
    fa.faastars.surrogate = SurrogateKind::Quadratic;
    fa.faastars.retrain_every = 50;
    specs.push_back(fa);
    for (const auto& spec : specs) {
      const std::size_t maxit = pb.dim * pb.dim + 100;
      const TrialResult r = run_trial(pb, spec, maxit, 1010, 0);
      ++runs;
      const bool ok = r.oracle_calls == r.ecnoise_evals + 1 + 2 * r.run.steps &&
                      r.ledger_size == r.oracle_calls;
      if (!ok) {
        ++bad;
        v.detail << "[x] " << id << '/' << spec.name() << " calls " << r.oracle_calls << "; ";
      }
    }
  }
  v.require(bad == 0, "calls = m + 1 + 2 steps in " + std::to_string(runs - bad) + "/" +
                          std::to_string(runs) + " runs");

  AlgorithmSpec fa{Algorithm::Faastars};
  fa.faastars.surrogate = SurrogateKind::Quadratic;
  fa.faastars.retrain_every = 40;
  const BenchmarkProblem pb = make_problem("ex2");
  std::string text[2];
  for (int i = 0; i < 2; ++i) {
    const TrialBatch b = run_trials(pb, fa, 8, 400, 77, i == 0 ? 1 : 4);
    std::ostringstream os;
    write_history_csv(os, b.trials);
    write_summary_csv(os, {b.summary});
    text[i] = os.str();
  }
  v.require(!text[0].empty() && text[0] == text[1], "CSV bytes identical across thread counts");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Verdict&)> check;
  };
  const std::vector<Criterion> criteria{
      {"hyperparameter formulas", hyperparameters},
      {"oracle-error bounds", [](Verdict& v) { bounds(v, {"oracle-error", "active-oracle-error"}); }},
      {"subspace recovery", subspace_recovery},
      {"convergence ordering", ordering},
      {"known minimum", known_minimum},
      {"scaled-Lipschitz asymmetry", scaled_lipschitz},
      {"flat-lining", flat_lining},
      {"moments", [](Verdict& v) { bounds(v, {"moments"}); }},
      {"learning accuracy", learning},
      {"accounting and determinism", accounting},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].check(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    failed += !v.passed;
    std::printf("C%zu %s %s: %s\n", i + 1, v.passed ? "PASS" : "FAIL", criteria[i].name,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
