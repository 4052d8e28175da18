#pragma once

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "astars/bench.hpp"
#include "astars/csv.hpp"
#include "astars/external_oracle.hpp"
#include "astars/plot.hpp"

namespace astars::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;

struct RunSpec {
  std::string problem = "ex1";
  std::string oracle_cmd;  // non-empty: evaluate this command instead of a benchmark
  std::optional<std::size_t> dim;
  Algorithm algorithm = Algorithm::Stars;
  std::size_t trials = 100;
  std::optional<std::size_t> maxit;  // default 2 P^2
  std::uint64_t seed = 42;
  double tau = 0.95;
  std::size_t retrain_every = 0;
  SurrogateKind surrogate = SurrogateKind::Rbf;
  RidgeMode ridge = RidgeMode::Sigma2;
  HyperMode hyper = HyperMode::Exact;
  double scale = 1.0;
  std::optional<std::size_t> fixed_dim;
  std::optional<double> sigma2;
  std::optional<double> l1;
  std::string out = "history.csv";
  std::string summary_out;  // default: <out stem>.summary.csv
  std::string plot_out;

  bool operator==(const RunSpec&) const = default;
};

inline std::string hyper_text(HyperMode mode, double scale) {
  switch (mode) {
    case HyperMode::Exact:
      return "exact";
    case HyperMode::Estimated:
      return "estimated";
    case HyperMode::Scaled:
      return "scaled:" + format_double(scale);
  }
  return "exact";
}

/// Accepts exact, estimated, scaled:C and scaled(C).
inline std::optional<std::pair<HyperMode, double>> parse_hyper(std::string_view s) {
  if (s == "exact") {
    return std::pair{HyperMode::Exact, 1.0};
  }
  if (s == "estimated") {
    return std::pair{HyperMode::Estimated, 1.0};
  }
  std::string_view arg;
  if (s.substr(0, 7) == "scaled:") {
    arg = s.substr(7);
  } else if (s.substr(0, 7) == "scaled(" && s.size() > 8 && s.back() == ')') {
    arg = s.substr(7, s.size() - 8);
  } else {
    return std::nullopt;
  }
  const auto c = parse_double(arg);
  if (!c || !(*c > 0.0) || !std::isfinite(*c)) {
    return std::nullopt;
  }
  return std::pair{HyperMode::Scaled, *c};
}

/// Flags that reproduce `spec` when parsed (the leading "run" included).
inline std::vector<std::string> to_args(const RunSpec& spec) {
  std::vector<std::string> a{"run"};
  const auto add = [&a](std::string flag, std::string value) {
    a.push_back(std::move(flag));
    a.push_back(std::move(value));
  };
  if (spec.oracle_cmd.empty()) {
    add("--problem", spec.problem);
  } else {
    add("--oracle-cmd", spec.oracle_cmd);
  }
  if (spec.dim) {
    add("--dim", std::to_string(*spec.dim));
  }
  add("--algo", to_string(spec.algorithm));
  add("--trials", std::to_string(spec.trials));
  if (spec.maxit) {
    add("--maxit", std::to_string(*spec.maxit));
  }
  add("--seed", std::to_string(spec.seed));
  add("--tau", format_double(spec.tau));
  add("--retrain-every", std::to_string(spec.retrain_every));
  add("--surrogate", to_string(spec.surrogate));
  add("--ridge", spec.ridge == RidgeMode::Off ? "off" : "sigma2");
  add("--hyper", hyper_text(spec.hyper, spec.scale));
  if (spec.fixed_dim) {
    add("--fixed-dim", std::to_string(*spec.fixed_dim));
  }
  if (spec.sigma2) {
    add("--sigma2", format_double(*spec.sigma2));
  }
  if (spec.l1) {
    add("--l1", format_double(*spec.l1));
  }
  add("--out", spec.out);
  if (!spec.summary_out.empty()) {
    add("--summary", spec.summary_out);
  }
  if (!spec.plot_out.empty()) {
    add("--plot", spec.plot_out);
  }
  return a;
}

/// Raw option storage bound to a `run` subcommand.
struct RunFlags {
  RunSpec spec;
  std::string algo = "stars";
  std::string surrogate = "rbf";
  std::string ridge = "sigma2";
  std::string hyper = "exact";
  std::optional<std::size_t> jobs;

  void bind(CLI::App& run) {
    run.add_option("--problem", spec.problem, "benchmark id (ex1..ex5)");
    run.add_option("--oracle-cmd", spec.oracle_cmd,
                   "shell command reading coordinates on stdin, printing f on stdout");
    run.add_option("--dim", spec.dim, "problem dimension (required with --oracle-cmd)");
    run.add_option("--algo", algo, "stars | astars | faastars")
        ->check(CLI::IsMember({"stars", "astars", "faastars"}));
    run.add_option("--trials", spec.trials, "independent trials")->check(CLI::PositiveNumber);
    run.add_option("--maxit", spec.maxit, "iterations per trial (default 2 P^2)");
    run.add_option("--seed", spec.seed, "base seed; trial t uses stream (seed, t)");
    run.add_option("--tau", spec.tau, "eigenvalue energy threshold in (0,1]");
    run.add_option("--retrain-every", spec.retrain_every, "FAASTARS refit period (0 = never)");
    run.add_option("--surrogate", surrogate, "linear | quadratic | rbf")
        ->check(CLI::IsMember({"linear", "quadratic", "rbf"}));
    run.add_option("--ridge", ridge, "surrogate ridge: off | sigma2")
        ->check(CLI::IsMember({"off", "sigma2"}));
    run.add_option("--hyper", hyper, "exact | estimated | scaled:C");
    run.add_option("--fixed-dim", spec.fixed_dim, "FAASTARS: fix the learned dimension");
    run.add_option("--sigma2", spec.sigma2, "noise variance override");
    run.add_option("--l1", spec.l1, "Lipschitz constant override");
    run.add_option("--out", spec.out, "history CSV path");
    run.add_option("--summary", spec.summary_out, "summary CSV path");
    run.add_option("--plot", spec.plot_out, "SVG plot path");
    run.add_option("--jobs", jobs, "parallel trials (env ASTARS_JOBS)");
  }

  /// Converts the raw strings; returns an error message on bad values.
  std::optional<std::string> finish() {
    spec.algorithm = algo == "astars"     ? Algorithm::Astars
                     : algo == "faastars" ? Algorithm::Faastars
                                          : Algorithm::Stars;
    spec.surrogate = surrogate == "linear"      ? SurrogateKind::Linear
                     : surrogate == "quadratic" ? SurrogateKind::Quadratic
                                                : SurrogateKind::Rbf;
    spec.ridge = ridge == "off" ? RidgeMode::Off : RidgeMode::Sigma2;
    const auto h = parse_hyper(hyper);
    if (!h) {
      return "--hyper: expected exact, estimated or scaled:C with C > 0, got '" + hyper + "'";
    }
    spec.hyper = h->first;
    spec.scale = h->second;
    if (!(spec.tau > 0.0 && spec.tau <= 1.0)) {
      return "--tau must lie in (0,1]";
    }
    if (!spec.oracle_cmd.empty() && !spec.dim) {
      return "--oracle-cmd needs --dim";
    }
    return std::nullopt;
  }
};

/// Parses `run ...` arguments into a RunSpec (used for round-trip checks).
inline std::optional<RunSpec> parse_run_args(std::vector<std::string> args) {
  CLI::App app{"astars"};
  auto* run = app.add_subcommand("run");
  RunFlags flags;
  flags.bind(*run);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError&) {
    return std::nullopt;
  }
  if (flags.finish()) {
    return std::nullopt;
  }
  return flags.spec;
}

inline std::size_t resolve_jobs(std::optional<std::size_t> flag) {
  if (flag && *flag > 0) {
    return *flag;
  }
  if (const char* env = std::getenv("ASTARS_JOBS")) {
    const auto v = parse_double(env);
    if (v && *v >= 1.0) {
      return static_cast<std::size_t>(*v);
    }
  }
  return 1;
}

inline std::string default_summary_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".summary.csv");
  return p.string();
}

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline BenchmarkProblem problem_for(const RunSpec& spec) {
  if (!spec.oracle_cmd.empty()) {
    BenchmarkProblem pb = external_problem(spec.oracle_cmd, *spec.dim, spec.sigma2, spec.l1);
    if (spec.hyper != HyperMode::Estimated && (!spec.sigma2 || !spec.l1)) {
      throw UsageError("external oracles need --sigma2 and --l1 unless --hyper estimated");
    }
    if (spec.algorithm == Algorithm::Astars) {
      throw UsageError("astars needs a known active subspace; use faastars with --oracle-cmd");
    }
    return pb;
  }
  ProblemOverrides ov;
  ov.dim = spec.dim;
  ov.sigma2 = spec.sigma2;
  ov.l1 = spec.l1;
  if (spec.problem == "ex5" && spec.algorithm == Algorithm::Astars && spec.fixed_dim) {
    ov.active_dim = spec.fixed_dim;
  }
  try {
    return make_problem(spec.problem, ov);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline AlgorithmSpec algorithm_for(const RunSpec& spec) {
  AlgorithmSpec a;
  a.algorithm = spec.algorithm;
  a.mode = spec.hyper;
  a.scale = spec.scale;
  a.faastars.surrogate = spec.surrogate;
  a.faastars.tau = spec.tau;
  a.faastars.retrain_every = spec.retrain_every;
  a.faastars.ridge_mode = spec.ridge;
  if (spec.fixed_dim) {
    a.faastars.fixed_dim = static_cast<Eigen::Index>(*spec.fixed_dim);
  }
  return a;
}

inline std::size_t default_maxit(std::size_t p) { return 2 * p * p; }

inline int execute_run(const RunSpec& spec, std::size_t jobs, std::ostream& out) {
  const BenchmarkProblem pb = problem_for(spec);
  const AlgorithmSpec algo = algorithm_for(spec);
  const std::size_t maxit = spec.maxit.value_or(default_maxit(pb.dim));
  const TrialBatch batch = run_trials(pb, algo, spec.trials, maxit, spec.seed, jobs);
  {
    std::ofstream os(spec.out);
    if (!os) {
      throw std::runtime_error("cannot write " + spec.out);
    }
    write_history_csv(os, batch.trials);
  }
  const std::string summary_path =
      spec.summary_out.empty() ? default_summary_path(spec.out) : spec.summary_out;
  {
    std::ofstream os(summary_path);
    if (!os) {
      throw std::runtime_error("cannot write " + summary_path);
    }
    write_summary_csv(os, {batch.summary});
  }
  if (!spec.plot_out.empty()) {
    emit_plot(summary_path, spec.plot_out);
  }
  out << pb.id << ' ' << algo.name() << ": " << batch.summary.completed << '/'
      << batch.summary.trials
      << " trials completed, final median f = " << format_double(batch.summary.final_median_f())
      << '\n';
  out << "history: " << spec.out << "\nsummary: " << summary_path << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Canned figure reproductions. These values are frozen here on purpose.

struct CannedSeries {
  std::string_view label;
  Algorithm algorithm;
  HyperMode mode;
  double scale;
  SurrogateKind surrogate;
  double tau;
  std::size_t retrain_every;
  RidgeMode ridge;
  Eigen::Index fixed_dim;  // 0: learned by threshold
};

struct CannedFigure {
  std::string_view name;
  std::string_view problem;
  std::size_t trials;
  std::size_t maxit;
  std::uint64_t seed;
  std::size_t series_count;
  std::array<CannedSeries, 4> series;
};

inline constexpr std::array<CannedFigure, 5> kCannedFigures{{
    {"fig1",
     "ex1",
     100,
     800,
     1001,
     3,
     {{{"stars", Algorithm::Stars, HyperMode::Exact, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"astars", Algorithm::Astars, HyperMode::Exact, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"faastars", Algorithm::Faastars, HyperMode::Exact, 1.0, SurrogateKind::Quadratic, 0.99, 40,
        RidgeMode::Off, 0},
       {}}}},
    {"fig2",
     "ex2",
     100,
     800,
     1002,
     3,
     {{{"stars", Algorithm::Stars, HyperMode::Exact, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"astars", Algorithm::Astars, HyperMode::Exact, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"faastars", Algorithm::Faastars, HyperMode::Exact, 1.0, SurrogateKind::Quadratic, 0.999, 20,
        RidgeMode::Sigma2, 0},
       {}}}},
    {"fig3",
     "ex3",
     25,
     7500,
     1003,
     3,
     {{{"stars", Algorithm::Stars, HyperMode::Exact, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"astars", Algorithm::Astars, HyperMode::Exact, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"faastars", Algorithm::Faastars, HyperMode::Exact, 1.0, SurrogateKind::Quadratic, 0.999, 0,
        RidgeMode::Sigma2, 0},
       {}}}},
    {"fig4",
     "ex4",
     100,
     2000,
     1004,
     4,
     {{{"c=0.1", Algorithm::Stars, HyperMode::Scaled, 0.1, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"c=0.2", Algorithm::Stars, HyperMode::Scaled, 0.2, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"c=1", Algorithm::Stars, HyperMode::Scaled, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"c=4", Algorithm::Stars, HyperMode::Scaled, 4.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0}}}},
    {"fig5",
     "ex5",
     25,
     5000,
     1005,
     4,
     {{{"stars", Algorithm::Stars, HyperMode::Exact, 1.0, SurrogateKind::Rbf, 0.95, 0,
        RidgeMode::Off, 0},
       {"faastars j=2", Algorithm::Faastars, HyperMode::Exact, 1.0, SurrogateKind::Quadratic, 0.95,
        0, RidgeMode::Sigma2, 2},
       {"faastars j=4", Algorithm::Faastars, HyperMode::Exact, 1.0, SurrogateKind::Quadratic, 0.95,
        0, RidgeMode::Sigma2, 4},
       {"faastars j=8", Algorithm::Faastars, HyperMode::Exact, 1.0, SurrogateKind::Quadratic, 0.95,
        0, RidgeMode::Sigma2, 8}}}},
}};

inline const CannedFigure* find_figure(std::string_view name) {
  for (const auto& f : kCannedFigures) {
    if (f.name == name) {
      return &f;
    }
  }
  return nullptr;
}

inline AlgorithmSpec algorithm_for(const CannedSeries& s) {
  AlgorithmSpec a;
  a.algorithm = s.algorithm;
  a.mode = s.mode;
  a.scale = s.scale;
  a.label = std::string(s.label);
  a.faastars.surrogate = s.surrogate;
  a.faastars.tau = s.tau;
  a.faastars.retrain_every = s.retrain_every;
  a.faastars.ridge_mode = s.ridge;
  if (s.fixed_dim > 0) {
    a.faastars.fixed_dim = s.fixed_dim;
  }
  return a;
}

/// Runs every series of a canned figure with the given trial/iteration counts.
inline std::vector<TrialBatch> run_figure(const CannedFigure& fig, std::size_t trials,
                                          std::size_t maxit, std::size_t jobs) {
  const BenchmarkProblem pb = make_problem(fig.problem);
  std::vector<TrialBatch> out;
  for (std::size_t i = 0; i < fig.series_count; ++i) {
    out.push_back(run_trials(pb, algorithm_for(fig.series[i]), trials, maxit, fig.seed, jobs));
  }
  return out;
}

inline int execute_reproduce(const CannedFigure& fig, std::optional<std::size_t> trials,
                             std::optional<std::size_t> maxit, const std::string& out_dir,
                             std::size_t jobs, std::ostream& out) {
  const auto batches =
      run_figure(fig, trials.value_or(fig.trials), maxit.value_or(fig.maxit), jobs);
  std::vector<TrialSummary> summaries;
  for (const auto& b : batches) {
    summaries.push_back(b.summary);
  }
  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir) / std::string(fig.name);
  const std::string csv = base.string() + "_summary.csv";
  {
    std::ofstream os(csv);
    if (!os) {
      throw std::runtime_error("cannot write " + csv);
    }
    write_summary_csv(os, summaries);
  }
  const std::string svg = base.string() + ".svg";
  PlotOptions opt;
  opt.title = std::string(fig.name) + " (" + std::string(fig.problem) + ")";
  emit_plot(csv, svg, opt);
  for (const auto& s : summaries) {
    out << fig.name << ' ' << s.label << ": completed " << s.completed << '/' << s.trials
        << ", final median f = " << format_double(s.final_median_f()) << '\n';
  }
  out << "summary: " << csv << "\nplot: " << svg << '\n';
  return kExitOk;
}

inline int execute_validate(const std::string& suite, std::ostream& out) {
  const BoundsReport report = validate_bounds(suite);
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": value=" << format_double(c.value)
        << " range=[" << format_double(c.lower) << ", " << format_double(c.upper) << "]\n";
  }
  return report.passed() ? kExitOk : kExitValidation;
}

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized derivative-free optimization with active subspaces", "astars"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an algorithm on a benchmark or external oracle");
  RunFlags flags;
  flags.bind(*run);

  auto* validate = app.add_subcommand("validate", "Monte Carlo checks of the error bounds");
  std::string suite = "all";
  validate->add_option("--suite", suite,
                       "all | oracle-error | active-oracle-error | moments | "
                       "k-identity");

  auto* reproduce = app.add_subcommand("reproduce", "canned benchmark figure");
  std::string figure;
  std::optional<std::size_t> rep_trials;
  std::optional<std::size_t> rep_maxit;
  std::optional<std::size_t> rep_jobs;
  std::string out_dir = ".";
  reproduce->add_option("figure", figure, "fig1..fig5")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5"}));
  reproduce->add_option("--trials", rep_trials, "override the trial count");
  reproduce->add_option("--maxit", rep_maxit, "override the iteration count");
  reproduce->add_option("--out-dir", out_dir, "output directory");
  reproduce->add_option("--jobs", rep_jobs, "parallel trials (env ASTARS_JOBS)");

  auto* plot = app.add_subcommand("plot", "render a summary CSV as SVG");
  std::string plot_in;
  std::string plot_out;
  plot->add_option("summary", plot_in, "summary CSV")->required();
  plot->add_option("output", plot_out, "SVG path")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (const auto msg = flags.finish()) {
        err << *msg << '\n' << run->help();
        return kExitUsage;
      }
      return execute_run(flags.spec, resolve_jobs(flags.jobs), out);
    }
    if (validate->parsed()) {
      return execute_validate(suite, out);
    }
    if (reproduce->parsed()) {
      return execute_reproduce(*find_figure(figure), rep_trials, rep_maxit, out_dir,
                               resolve_jobs(rep_jobs), out);
    }
    if (plot->parsed()) {
      emit_plot(plot_in, plot_out);
      out << "plot: " << plot_out << '\n';
      return kExitOk;
    }
  } catch (const CsvError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace astars::cli
