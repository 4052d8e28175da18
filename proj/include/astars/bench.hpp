#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "astars/active_stars.hpp"
#include "astars/core.hpp"
#include "astars/faastars.hpp"
#include "astars/learning.hpp"
#include "astars/stars.hpp"
#include "astars/subspace.hpp"

namespace astars {

/// Published constants of the five benchmark problems.
struct ProblemConstants {
  std::string_view id;
  std::size_t dim;
  std::size_t active_dim;  // 0 when the problem defines none
  double sigma2;
  double l1;
};

inline constexpr std::array<ProblemConstants, 5> kProblemConstants{{
    {"ex1", 20, 1, 1e-4, 2.0},
    {"ex2", 20, 10, 1e-3, 2.0},
    {"ex3", 50, 5, 1e-4, 4.0},
    {"ex4", 10, 10, 1e-5, 2.0},
    {"ex5", 10, 0, 1e-3, 1024.0},
}};

inline constexpr double kInitialScale = 10.0;

using GradientFn = std::function<Vector(const Point&)>;

struct ProblemOverrides {
  std::optional<std::size_t> dim;
  std::optional<std::size_t> active_dim;
  std::optional<double> sigma2;
  std::optional<double> l1;
  // ex1: weight vector w. ex4: diagonal weights omega.
  std::optional<Vector> weights;
  std::optional<NoiseKind> noise_kind;
};

struct BenchmarkProblem {
  std::string id;
  std::size_t dim = 0;
  std::optional<Eigen::Index> active_dim;
  NoiseModel noise;
  double l1 = 0.0;
  Objective objective;
  GradientFn gradient;
  std::optional<Matrix> exact_active_basis;
  std::optional<double> f_star;
  std::optional<Vector> active_minimizer;  // leading coordinates of a minimizer
  double initial_scale = kInitialScale;
  // Noise variance assumed by exact hyperparameters when the oracle brings
  // its own noise (external commands).
  std::optional<double> assumed_sigma2;
  bool noiseless_access = true;

  NoisyOracle make_oracle() const { return NoisyOracle(dim, objective, noise, noiseless_access); }
  double hyper_sigma2() const { return assumed_sigma2.value_or(noise.sigma2); }

  /// Components drawn from N(0,1), scaled by 10, taken first from the trial stream.
  Point initial_iterate(RngStream& rng) const { return initial_scale * rng.standard_normal(dim); }

  std::optional<ActiveSubspace> exact_subspace() const {
    if (!exact_active_basis) {
      return std::nullopt;
    }
    return ActiveSubspace::from_active_columns(*exact_active_basis);
  }
};

inline std::vector<std::string> problem_ids() { return {"ex1", "ex2", "ex3", "ex4", "ex5"}; }

/// Coefficient of lambda_i^2 (1-based i) in the Nesterov-inspired problem.
inline double ex5_coefficient(std::size_t i) {
  const int e = static_cast<int>(i) - 1;
  return std::ldexp(1.0, (e % 2 == 0) ? e : -e);
}

inline BenchmarkProblem make_problem(std::string_view id, const ProblemOverrides& ov = {}) {
  const auto it = std::find_if(kProblemConstants.begin(), kProblemConstants.end(),
                               [&](const ProblemConstants& c) { return c.id == id; });
  if (it == kProblemConstants.end()) {
    throw std::invalid_argument("unknown problem '" + std::string(id) +
                                "'; valid ids: ex1, ex2, ex3, ex4, ex5");
  }
  BenchmarkProblem pb;
  pb.id = std::string(id);
  pb.dim = ov.dim.value_or(it->dim);
  pb.noise.kind = ov.noise_kind.value_or(NoiseKind::Additive);
  pb.noise.sigma2 = ov.sigma2.value_or(it->sigma2);
  pb.l1 = it->l1;
  const auto p = static_cast<Eigen::Index>(pb.dim);
  if (p < 1) {
    throw std::invalid_argument("problem dimension must be >= 1");
  }
  const auto coordinate_basis = [p](Eigen::Index j) { return Matrix(Matrix::Identity(p, j)); };

  if (id == "ex1") {
    Vector w = ov.weights.value_or(Vector::Ones(p));
    if (w.size() != p || w.norm() == 0.0) {
      throw std::invalid_argument("ex1: weight vector must be nonzero with length P");
    }
    pb.active_dim = 1;
    pb.objective = [w](const Point& x) {
      const double s = w.dot(x);
      return s * s;
    };
    pb.gradient = [w](const Point& x) -> Vector { return 2.0 * w.dot(x) * w; };
    pb.exact_active_basis = Matrix(w.normalized());
    pb.f_star = 0.0;
  } else if (id == "ex2" || id == "ex3") {
    const auto j = static_cast<Eigen::Index>(ov.active_dim.value_or(it->active_dim));
    if (j < 1 || j > p) {
      throw std::invalid_argument(std::string(id) + ": need 1 <= j <= P");
    }
    pb.active_dim = j;
    pb.exact_active_basis = coordinate_basis(j);
    if (id == "ex2") {
      pb.objective = [j](const Point& x) { return x.head(j).squaredNorm(); };
      pb.gradient = [j](const Point& x) -> Vector {
        Vector g = Vector::Zero(x.size());
        g.head(j) = 2.0 * x.head(j);
        return g;
      };
      pb.f_star = 0.0;
    } else {
      pb.objective = [j](const Point& x) {
        double s = x[0] * x[0] + x[j - 1] * x[j - 1];
        for (Eigen::Index i = 0; i + 1 < j; ++i) {
          const double d = x[i] - x[i + 1];
          s += d * d;
        }
        return 0.5 * s - x[0];
      };
      pb.gradient = [j](const Point& x) -> Vector {
        Vector g = Vector::Zero(x.size());
        g[0] += x[0] - 1.0;
        g[j - 1] += x[j - 1];
        for (Eigen::Index i = 0; i + 1 < j; ++i) {
          const double d = x[i] - x[i + 1];
          g[i] += d;
          g[i + 1] -= d;
        }
        return g;
      };
      const double jd = static_cast<double>(j);
      pb.f_star = -0.5 * (1.0 - 1.0 / (jd + 1.0));
      Vector star(j);
      for (Eigen::Index i = 0; i < j; ++i) {
        star[i] = 1.0 - static_cast<double>(i + 1) / (jd + 1.0);
      }
      pb.active_minimizer = star;
    }
  } else if (id == "ex4") {
    Vector omega = ov.weights.value_or(Vector::Ones(p));
    if (omega.size() != p || (omega.array() < 0.0).any()) {
      throw std::invalid_argument("ex4: weights must be nonnegative with length P");
    }
    if (ov.weights) {
      pb.l1 = 2.0 * omega.maxCoeff();
    }
    pb.active_dim = p;
    pb.exact_active_basis = coordinate_basis(p);
    pb.objective = [omega](const Point& x) { return omega.dot(x.cwiseProduct(x)); };
    pb.gradient = [omega](const Point& x) -> Vector { return 2.0 * omega.cwiseProduct(x); };
    pb.f_star = 0.0;
  } else {
    Vector coef(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      coef[i] = ex5_coefficient(static_cast<std::size_t>(i + 1));
    }
    pb.objective = [coef](const Point& x) { return coef.dot(x.cwiseProduct(x)); };
    pb.gradient = [coef](const Point& x) -> Vector { return 2.0 * coef.cwiseProduct(x); };
    pb.f_star = 0.0;
    if (ov.active_dim) {
      // leading directions ordered by curvature
      std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
      for (Eigen::Index i = 0; i < p; ++i) {
        order[static_cast<std::size_t>(i)] = i;
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return coef[a] > coef[b]; });
      const auto j = static_cast<Eigen::Index>(*ov.active_dim);
      if (j < 1 || j > p) {
        throw std::invalid_argument("ex5: need 1 <= j <= P");
      }
      Matrix basis = Matrix::Zero(p, j);
      for (Eigen::Index c = 0; c < j; ++c) {
        basis(order[static_cast<std::size_t>(c)], c) = 1.0;
      }
      pb.active_dim = j;
      pb.exact_active_basis = basis;
    }
  }
  if (ov.l1) {
    pb.l1 = *ov.l1;
  }
  pb.noise.validate();
  return pb;
}

enum class Algorithm { Stars, Astars, Faastars };
enum class HyperMode { Exact, Estimated, Scaled };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Stars:
      return "stars";
    case Algorithm::Astars:
      return "astars";
    case Algorithm::Faastars:
      return "faastars";
  }
  return "?";
}

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::Stars;
  HyperMode mode = HyperMode::Exact;
  // L1 multiplier for HyperMode::Scaled (hat L1 = c L1).
  double scale = 1.0;
  // FAASTARS settings; maxit is taken from the run.
  FaastarsConfig faastars;
  std::string label;

  std::string name() const { return label.empty() ? to_string(algorithm) : label; }
};

struct TrialResult {
  RunResult run;
  std::optional<PhaseReport> report;
  std::size_t oracle_calls = 0;
  std::size_t ledger_size = 0;
  std::size_t ledger_rejected = 0;
  std::size_t ecnoise_evals = 0;
};

namespace detail {

struct HyperInputs {
  double sigma2;
  double l1;
  Provenance provenance;
};

inline HyperInputs hyper_inputs(const BenchmarkProblem& pb, const AlgorithmSpec& spec,
                                NoisyOracle& oracle, const Point& x0, RngStream& rng,
                                SampleLedger& ledger) {
  switch (spec.mode) {
    case HyperMode::Exact:
      return {pb.hyper_sigma2(), pb.l1, Provenance::Exact};
    case HyperMode::Scaled:
      return {pb.hyper_sigma2(), spec.scale * pb.l1, Provenance::Estimated};
    case HyperMode::Estimated: {
      const Phase1Result ph1 = phase1_learn(oracle, x0, rng, ledger, spec.faastars);
      return {std::max(ph1.noise.sigma2_hat, kSigma2Floor), ph1.lipschitz.l1_hat,
              Provenance::Estimated};
    }
  }
  return {pb.hyper_sigma2(), pb.l1, Provenance::Exact};
}

}  // namespace detail

/// One seeded trial. The trial stream is (base_seed, trial) and the initial
/// iterate is its first draw, so algorithms share x0 per trial index.
inline TrialResult run_trial(const BenchmarkProblem& pb, const AlgorithmSpec& spec,
                             std::size_t maxit, std::uint64_t base_seed, std::size_t trial) {
  RngStream rng(base_seed, trial);
  const Point x0 = pb.initial_iterate(rng);
  NoisyOracle oracle = pb.make_oracle();
  SampleLedger ledger;
  TrialResult out;
  const auto p = static_cast<Eigen::Index>(pb.dim);

  switch (spec.algorithm) {
    case Algorithm::Stars: {
      const auto in = detail::hyper_inputs(pb, spec, oracle, x0, rng, ledger);
      const StepRule rule{in.sigma2, in.l1, p, pb.noise.kind, in.provenance};
      out.run = run_stars(oracle, x0, maxit, rule, rng, ledger);
      break;
    }
    case Algorithm::Astars: {
      const auto as = pb.exact_subspace();
      if (!as) {
        throw std::invalid_argument("astars needs a problem with a known active subspace (" +
                                    pb.id + " has none; set its active dimension)");
      }
      const auto in = detail::hyper_inputs(pb, spec, oracle, x0, rng, ledger);
      const StepRule rule{in.sigma2, in.l1, as->dim(), pb.noise.kind, in.provenance};
      out.run = run_astars(oracle, x0, maxit, *as, rule, rng, ledger);
      break;
    }
    case Algorithm::Faastars: {
      FaastarsConfig cfg = spec.faastars;
      cfg.maxit = maxit;
      if (spec.mode == HyperMode::Exact) {
        cfg.sigma2_override = pb.hyper_sigma2();
        cfg.l1_override = pb.l1;
      } else if (spec.mode == HyperMode::Scaled) {
        cfg.sigma2_override = pb.hyper_sigma2();
        cfg.l1_override = spec.scale * pb.l1;
      }
      FaastarsResult fr = run_faastars(oracle, x0, cfg, rng, ledger, pb.exact_active_basis);
      out.run = std::move(fr.run);
      out.report = std::move(fr.report);
      break;
    }
  }
  out.oracle_calls = oracle.eval_count();
  out.ledger_size = ledger.size();
  out.ledger_rejected = ledger.rejected();
  out.ecnoise_evals = ledger.count(SamplePhase::EcNoise);
  return out;
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads; results land by index.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      f(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) {
          f(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

struct SummaryRow {
  std::size_t evals = 0;
  double q25_fhat = 0.0;
  double median_fhat = 0.0;
  double q75_fhat = 0.0;
  double q25_f = 0.0;
  double median_f = 0.0;
  double q75_f = 0.0;
};

struct TrialSummary {
  std::string label;
  std::vector<SummaryRow> rows;
  std::size_t trials = 0;
  std::size_t completed = 0;
  std::size_t diverged = 0;
  // first evaluation count at which the median noiseless f reaches each threshold
  std::vector<std::pair<double, std::optional<std::size_t>>> evals_to_threshold;

  double final_median_f() const {
    return rows.empty() ? std::numeric_limits<double>::quiet_NaN() : rows.back().median_f;
  }
};

/// Linear-interpolation quantile of an unsorted sample (q in [0,1]).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline const std::vector<double>& default_thresholds() {
  static const std::vector<double> t{1e2, 1e1, 1e0, 1e-1, 1e-2, 1e-3};
  return t;
}

/// Per-iteration quartiles over the trials that completed without diverging.
inline TrialSummary summarize(std::string label, const std::vector<TrialResult>& trials) {
  TrialSummary s;
  s.label = std::move(label);
  s.trials = trials.size();
  std::vector<const TrialHistory*> done;
  for (const auto& t : trials) {
    if (t.run.diverged) {
      ++s.diverged;
    } else {
      done.push_back(&t.run.history);
    }
  }
  s.completed = done.size();
  if (done.empty()) {
    return s;
  }
  std::size_t rows = done.front()->size();
  for (const auto* h : done) {
    rows = std::min(rows, h->size());
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> fhat(done.size());
  std::vector<double> ftrue(done.size());
  for (std::size_t r = 0; r < rows; ++r) {
    bool have_true = true;
    for (std::size_t t = 0; t < done.size(); ++t) {
      const HistoryRow& row = done[t]->rows()[r];
      fhat[t] = row.fhat;
      have_true = have_true && row.ftrue.has_value();
      ftrue[t] = row.ftrue.value_or(nan);
    }
    SummaryRow out;
    out.evals = done.front()->rows()[r].fevals;
    out.q25_fhat = quantile(fhat, 0.25);
    out.median_fhat = quantile(fhat, 0.5);
    out.q75_fhat = quantile(fhat, 0.75);
    if (have_true) {
      out.q25_f = quantile(ftrue, 0.25);
      out.median_f = quantile(ftrue, 0.5);
      out.q75_f = quantile(ftrue, 0.75);
    } else {
      out.q25_f = out.median_f = out.q75_f = nan;
    }
    s.rows.push_back(out);
  }
  for (double thr : default_thresholds()) {
    std::optional<std::size_t> hit;
    for (const auto& row : s.rows) {
      if (row.median_f <= thr) {
        hit = row.evals;
        break;
      }
    }
    s.evals_to_threshold.emplace_back(thr, hit);
  }
  return s;
}

struct TrialBatch {
  std::vector<TrialResult> trials;
  TrialSummary summary;
};

inline TrialBatch run_trials(const BenchmarkProblem& pb, const AlgorithmSpec& spec,
                             std::size_t trials, std::size_t maxit, std::uint64_t base_seed,
                             std::size_t jobs = 1) {
  if (trials < 1) {
    throw std::invalid_argument("run_trials: need at least one trial");
  }
  TrialBatch batch;
  batch.trials.resize(trials);
  parallel_for(trials, jobs,
               [&](std::size_t t) { batch.trials[t] = run_trial(pb, spec, maxit, base_seed, t); });
  batch.summary = summarize(spec.name(), batch.trials);
  return batch;
}

/// Noiseless value of the last recorded iterate whose cumulative evaluation
/// count does not exceed the budget.
inline std::optional<double> value_at_budget(const TrialHistory& h, std::size_t budget) {
  std::optional<double> out;
  for (const auto& row : h.rows()) {
    if (row.fevals > budget) {
      break;
    }
    out = row.ftrue;
  }
  return out;
}

inline double median_at_budget(const std::vector<TrialResult>& trials, std::size_t budget) {
  std::vector<double> v;
  for (const auto& t : trials) {
    if (const auto f = value_at_budget(t.run.history, budget)) {
      v.push_back(*f);
    }
  }
  return quantile(std::move(v), 0.5);
}

// ---------------------------------------------------------------------------
// Monte Carlo checks of the oracle-error and moment bounds.

struct BoundCheck {
  std::string name;
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool passed = false;

  double margin() const { return std::min(value - lower, upper - value); }
};

struct BoundsReport {
  std::vector<BoundCheck> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; });
  }
};

/// Coefficient (K1+K2)/sqrt(2 K1 K2) of the estimated-hyperparameter bound.
inline double oracle_bound_coefficient(double k1, double k2) {
  return (k1 + k2) / std::sqrt(2.0 * k1 * k2);
}

/// Upper bound on the expected oracle error at the (estimated) optimal
/// smoothing factor in `dim` directions.
inline double oracle_error_bound(double sigma2, double l1, double dim, double k1 = 1.0,
                                 double k2 = 1.0) {
  const double d6 = (dim + 6.0) * (dim + 6.0) * (dim + 6.0);
  return oracle_bound_coefficient(k1, k2) * std::sqrt(sigma2) * l1 * std::sqrt(dim * d6);
}

/// Mean over draws of |s_mu - <grad f, u> u|^2 at x, with s_mu the forward
/// difference of two independently noised evaluations along u = basis r.
inline double mean_oracle_error(const BenchmarkProblem& pb, const Point& x, const Matrix& basis,
                                double mu, std::size_t draws, RngStream& rng) {
  const double sigma = std::sqrt(pb.noise.sigma2);
  const double fx = pb.objective(x);
  const Vector grad = pb.gradient(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const Vector u = basis * rng.standard_normal(static_cast<std::size_t>(basis.cols()));
    const double e1 = sigma * rng.standard_normal();
    const double e2 = sigma * rng.standard_normal();
    const double fd = (pb.objective(x + mu * u) + e1 - (fx + e2)) / mu;
    acc += ((fd - grad.dot(u)) * u).squaredNorm();
  }
  return acc / static_cast<double>(draws);
}

struct MomentStats {
  double mean_m2 = 0.0;
  double stderr_m2 = 0.0;
  double mean_m6 = 0.0;
};

inline MomentStats norm_moments(const Matrix& basis, std::size_t draws, RngStream& rng) {
  double s2 = 0.0;
  double s4 = 0.0;
  double s6 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const Vector u = basis * rng.standard_normal(static_cast<std::size_t>(basis.cols()));
    const double n2 = u.squaredNorm();
    s2 += n2;
    s4 += n2 * n2;
    s6 += n2 * n2 * n2;
  }
  const double n = static_cast<double>(draws);
  MomentStats m;
  m.mean_m2 = s2 / n;
  const double var = (s4 / n - m.mean_m2 * m.mean_m2) * n / (n - 1.0);
  m.stderr_m2 = std::sqrt(var / n);
  m.mean_m6 = s6 / n;
  return m;
}

/// Random P x j matrix with orthonormal columns.
inline Matrix random_orthonormal(Eigen::Index p, Eigen::Index j, RngStream& rng) {
  Matrix g(p, j);
  for (Eigen::Index c = 0; c < j; ++c) {
    g.col(c) = rng.standard_normal(static_cast<std::size_t>(p));
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(p, j);
}

inline std::vector<std::string> bound_suites() {
  return {"oracle-error", "active-oracle-error", "moments", "k-identity"};
}

/// Runs the named suite ("all" runs every suite).
inline BoundsReport validate_bounds(std::string_view suite = "all", std::uint64_t seed = 20240101) {
  const auto suites = bound_suites();
  if (suite != "all" && std::find(suites.begin(), suites.end(), suite) == suites.end()) {
    throw std::invalid_argument("unknown bound suite '" + std::string(suite) +
                                "'; valid: all, oracle-error, active-oracle-error, moments, "
                                "k-identity");
  }
  const auto want = [&](std::string_view s) { return suite == "all" || suite == s; };
  BoundsReport report;
  const auto add = [&](std::string name, double value, double lower, double upper) {
    report.checks.push_back(
        BoundCheck{std::move(name), value, lower, upper, value >= lower && value <= upper});
  };
  constexpr std::size_t kOracleDraws = 10000;
  constexpr std::size_t kMomentDraws = 100000;

  if (want("oracle-error")) {
    const BenchmarkProblem pb = make_problem("ex4");
    const auto p = static_cast<Eigen::Index>(pb.dim);
    const double mu = compute_hyperparameters(pb.noise.sigma2, pb.l1, p, NoiseKind::Additive).mu;
    RngStream rng(seed, 1);
    const double mean =
        mean_oracle_error(pb, Vector::Ones(p), Matrix::Identity(p, p), mu, kOracleDraws, rng);
    add("oracle-error sphere P=10", mean, 0.0,
        oracle_error_bound(pb.noise.sigma2, pb.l1, static_cast<double>(p)));
  }
  if (want("active-oracle-error")) {
    const BenchmarkProblem pb = make_problem("ex2");
    const Eigen::Index j = *pb.active_dim;
    const double mu = active_hyperparameters(pb.noise.sigma2, pb.l1, j, NoiseKind::Additive).mu;
    RngStream rng(seed, 2);
    const double mean = mean_oracle_error(pb, Vector::Ones(static_cast<Eigen::Index>(pb.dim)),
                                          *pb.exact_active_basis, mu, kOracleDraws, rng);
    add("active-oracle-error ex2 j=10", mean, 0.0,
        oracle_error_bound(pb.noise.sigma2, pb.l1, static_cast<double>(j)));
  }
  if (want("moments")) {
    constexpr Eigen::Index p = 20;
    constexpr Eigen::Index j = 10;
    RngStream rng(seed, 3);
    const MomentStats full = norm_moments(Matrix::Identity(p, p), kMomentDraws, rng);
    add("E|u|^2 = P (P=20)", full.mean_m2, p - 3.0 * full.stderr_m2, p + 3.0 * full.stderr_m2);
    add("E|u|^6 <= (P+6)^3", full.mean_m6, 0.0, std::pow(p + 6.0, 3));
    const Matrix va = random_orthonormal(p, j, rng);
    const MomentStats act = norm_moments(va, kMomentDraws, rng);
    add("E|u_A|^2 = j (j=10)", act.mean_m2, j - 3.0 * act.stderr_m2, j + 3.0 * act.stderr_m2);
    add("E|u_A|^6 <= (j+6)^3", act.mean_m6, 0.0, std::pow(j + 6.0, 3));
  }
  if (want("k-identity")) {
    const double c = oracle_bound_coefficient(1.0, 1.0);
    add("(K1+K2)/sqrt(2K1K2) at K1=K2=1 equals sqrt(2)", c, std::sqrt(2.0) - 1e-15,
        std::sqrt(2.0) + 1e-15);
  }
  return report;
}

}  // namespace astars
