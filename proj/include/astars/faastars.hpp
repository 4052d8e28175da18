#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "astars/active_stars.hpp"
#include "astars/core.hpp"
#include "astars/learning.hpp"
#include "astars/stars.hpp"
#include "astars/subspace.hpp"
#include "astars/surrogate.hpp"

namespace astars {

enum class RidgeMode { Off, Sigma2 };

struct FaastarsConfig {
  std::size_t maxit = 0;
  SurrogateKind surrogate = SurrogateKind::Rbf;
  double tau = 0.95;
  // 0 disables subspace retraining.
  std::size_t retrain_every = 0;
  bool l1_updates = false;
  LipschitzSource l1_update_source = LipschitzSource::FiniteDifference;
  RidgeMode ridge_mode = RidgeMode::Sigma2;
  // Pins the learned dimension instead of thresholding the spectrum.
  std::optional<Eigen::Index> fixed_dim;
  std::size_t ecnoise_samples = kDefaultEcNoiseSamples;
  double l1_safety_factor = 1.0;
  bool normalize_inputs = false;
  // Injected hyperparameter inputs; when absent phase-1 estimates are used.
  std::optional<double> sigma2_override;
  std::optional<double> l1_override;
};

struct PhaseReport {
  double sigma2_hat = 0.0;
  double l1_hat = 0.0;
  std::size_t burnin_steps = 0;
  Eigen::Index j_tilde = 0;
  std::optional<double> delta;
  NoiseConfidence noise_confidence = NoiseConfidence::Weak;
  SurrogateKind surrogate_used = SurrogateKind::Rbf;
  bool surrogate_fallback = false;
  std::size_t retrains = 0;
  std::size_t refit_failures = 0;
  std::vector<Eigen::Index> j_history;
  Eigen::Index phase2_dim = 0;
  Eigen::Index phase3_dim = 0;
  Provenance provenance = Provenance::Estimated;
};

struct Phase1Result {
  NoiseEstimate noise;
  LipschitzEstimate lipschitz;
  LineSamples line;
};

/// Learned subspace plus what produced it.
struct LearnedSubspace {
  ActiveSubspace subspace;
  SurrogateKind surrogate_used = SurrogateKind::Rbf;
  bool fallback = false;
  double hessian_norm = 0.0;
};

/// Variance floor used when forming hyperparameters from a zero estimate.
inline constexpr double kSigma2Floor = 1e-14;

/// STARS steps needed before the ledger holds enough samples for the
/// surrogate, counting the samples already present.
inline std::size_t burnin_steps(SurrogateKind kind, std::size_t p, std::size_t samples_present) {
  const std::size_t need = min_samples(kind, p);
  if (samples_present >= need) {
    return 0;
  }
  return (need - samples_present + 1) / 2;
}

/// Phase 1: noise variance from ECNoise at x0 and an initial L1 from the
/// same line samples (or from a surrogate Hessian when enough samples exist).
inline Phase1Result phase1_learn(NoisyOracle& oracle, const Point& x0, RngStream& rng,
                                 SampleLedger& ledger, const FaastarsConfig& config = {}) {
  const std::size_t p = oracle.dim();
  const Point direction = rng.unit_vector(p);
  const double spacing = default_ecnoise_spacing(x0);
  EcNoiseResult ec = ecnoise(oracle, x0, direction, spacing, config.ecnoise_samples, rng, ledger);

  Phase1Result out;
  out.noise = ec.estimate;
  out.lipschitz = l1_init(ec.line.values, spacing);
  if (ec.line.values.size() > p + 1) {
    const SurrogateKind kind = ec.line.values.size() >= min_samples(SurrogateKind::Quadratic, p)
                                   ? SurrogateKind::Quadratic
                                   : SurrogateKind::Linear;
    try {
      const Surrogate f = Surrogate::fit(kind, ledger, SurrogateOptions{out.noise.sigma2_hat});
      out.lipschitz =
          l1_update(out.lipschitz, f.hessian_spectral_norm(), LipschitzSource::SurrogateHessian);
    } catch (const SurrogateFitError&) {
      // line samples alone rarely determine a surrogate; keep the FD value
    }
  }
  if (config.l1_safety_factor != 1.0) {
    out.lipschitz.l1_hat *= config.l1_safety_factor;
    out.lipschitz.history.push_back(out.lipschitz.l1_hat);
  }
  out.line = std::move(ec.line);
  return out;
}

/// Fit a surrogate to the whole ledger, take its gradient at every sample,
/// and threshold the resulting sensitivity spectrum. Falls back to a linear
/// surrogate when the requested kind cannot be fit.
inline LearnedSubspace learn_subspace(const SampleLedger& ledger, SurrogateKind kind,
                                      const SurrogateOptions& options, double tau,
                                      std::optional<Eigen::Index> fixed_dim = std::nullopt) {
  const Matrix points = ledger.points();
  const Vector values = ledger.values();
  LearnedSubspace out;
  std::optional<Surrogate> model;
  try {
    model = Surrogate::fit(kind, points, values, options);
    out.surrogate_used = kind;
  } catch (const SurrogateFitError&) {
    if (kind == SurrogateKind::Linear) {
      throw;
    }
    model = Surrogate::fit(SurrogateKind::Linear, points, values, options);
    out.surrogate_used = SurrogateKind::Linear;
    out.fallback = true;
  }
  std::vector<Vector> gradients;
  gradients.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    gradients.push_back(model->gradient_at(points.row(i).transpose()));
  }
  const SensitivityMatrix w = build_sensitivity(gradients);
  if (!(w.entries.trace() > 0.0)) {
    throw SurrogateFitError("learned surrogate is flat: no subspace structure");
  }
  out.subspace = make_active_subspace(w, tau, fixed_dim);
  out.hessian_norm = model->hessian_spectral_norm();
  return out;
}

namespace detail {

inline SurrogateOptions surrogate_options(const FaastarsConfig& config, double sigma2) {
  return SurrogateOptions{config.ridge_mode == RidgeMode::Sigma2 ? sigma2 : 0.0,
                          config.normalize_inputs};
}

inline double effective_sigma2(const FaastarsConfig& config, double sigma2_hat) {
  return std::max(config.sigma2_override.value_or(sigma2_hat), kSigma2Floor);
}

inline void maybe_update_l1(const FaastarsConfig& config, const std::optional<StepRecord>& rec,
                            const StarsState& s, LipschitzEstimate& l1) {
  if (!config.l1_updates || config.l1_override ||
      config.l1_update_source != LipschitzSource::FiniteDifference || !rec) {
    return;
  }
  const double unorm = rec->direction.norm();
  if (unorm == 0.0) {
    return;
  }
  // three collinear samples along u: previous iterate, perturbed point, new iterate
  const auto curvature = curvature_from_samples(0.0, rec->f_previous, rec->mu * unorm, rec->g,
                                                -rec->h * rec->slope * unorm, s.f_current);
  if (curvature) {
    l1 = l1_update(l1, *curvature, LipschitzSource::FiniteDifference);
  }
}

}  // namespace detail

struct Phase2Result {
  StarsState state;
  LearnedSubspace learned;
  LipschitzEstimate lipschitz;
  PhaseReport report;
};

/// Phase 2: full-variable STARS with estimated hyperparameters until the
/// ledger can support the surrogate, then subspace discovery from the ledger.
inline Phase2Result phase2_burnin(NoisyOracle& oracle, const Point& x0, const Phase1Result& phase1,
                                  const FaastarsConfig& config, RngStream& rng,
                                  SampleLedger& ledger,
                                  const std::optional<Matrix>& reference = std::nullopt) {
  const auto p = static_cast<Eigen::Index>(oracle.dim());
  const std::size_t steps = burnin_steps(config.surrogate, oracle.dim(), ledger.size());
  if (config.maxit <= steps) {
    throw std::invalid_argument("faastars: maxit " + std::to_string(config.maxit) +
                                " does not exceed the " + std::to_string(steps) +
                                " burn-in steps the surrogate needs");
  }
  Phase2Result out;
  out.lipschitz = phase1.lipschitz;
  const double sigma2 = detail::effective_sigma2(config, phase1.noise.sigma2_hat);
  const bool injected = config.sigma2_override.has_value() && config.l1_override.has_value();
  StepRule rule{sigma2, config.l1_override.value_or(out.lipschitz.l1_hat), p, oracle.noise().kind,
                injected ? Provenance::Exact : Provenance::Estimated};

  StarsState s = init_state(oracle, x0, rule, rng, ledger, SamplePhase::BurnIn);
  while (s.k < steps && !s.diverged) {
    const auto rec = stars_step(s, oracle, rng, ledger, SamplePhase::BurnIn);
    detail::maybe_update_l1(config, rec, s, out.lipschitz);
    if (!config.l1_override) {
      s.rule.l1 = out.lipschitz.l1_hat;
    }
  }

  PhaseReport& report = out.report;
  report.sigma2_hat = phase1.noise.sigma2_hat;
  report.noise_confidence = phase1.noise.confidence;
  report.burnin_steps = steps;
  report.phase2_dim = p;
  report.provenance = rule.provenance;

  if (!s.diverged) {
    const SurrogateOptions options = detail::surrogate_options(config, sigma2);
    out.learned = learn_subspace(ledger, config.surrogate, options, config.tau, config.fixed_dim);
    if (config.l1_updates && !config.l1_override &&
        config.l1_update_source == LipschitzSource::SurrogateHessian) {
      out.lipschitz =
          l1_update(out.lipschitz, out.learned.hessian_norm, LipschitzSource::SurrogateHessian);
    }
    report.surrogate_used = out.learned.surrogate_used;
    report.surrogate_fallback = out.learned.fallback;
    report.j_tilde = out.learned.subspace.dim();
    report.j_history.push_back(report.j_tilde);
    if (reference && reference->cols() == report.j_tilde) {
      report.delta = subspace_distance(*reference, out.learned.subspace.active());
    }
  }
  report.l1_hat = config.l1_override.value_or(out.lipschitz.l1_hat);
  out.state = std::move(s);
  return out;
}

/// Phase 3 with optional retraining: approximate ASTARS in the learned
/// subspace until maxit, refitting the subspace from the whole ledger after
/// every block of `retrain_every` steps that is followed by more steps.
inline void retrain_loop(StarsState& s, LearnedSubspace learned, LipschitzEstimate& lipschitz,
                         const FaastarsConfig& config, NoisyOracle& oracle, RngStream& rng,
                         SampleLedger& ledger, PhaseReport& report,
                         const std::optional<Matrix>& reference = std::nullopt) {
  const double sigma2 = s.rule.sigma2;
  const auto set_rule = [&](Eigen::Index dim) {
    s.rule.dim = dim;
    s.rule.l1 = config.l1_override.value_or(lipschitz.l1_hat);
  };
  set_rule(learned.subspace.dim());
  report.phase3_dim = learned.subspace.dim();

  std::size_t in_block = 0;
  while (s.k < config.maxit && !s.diverged) {
    const auto rec = astars_step(s, learned.subspace, oracle, rng, ledger, SamplePhase::Astars);
    detail::maybe_update_l1(config, rec, s, lipschitz);
    set_rule(learned.subspace.dim());
    ++in_block;
    if (config.retrain_every > 0 && in_block == config.retrain_every && s.k < config.maxit &&
        !s.diverged) {
      in_block = 0;
      ++report.retrains;
      try {
        learned =
            learn_subspace(ledger, config.surrogate, detail::surrogate_options(config, sigma2),
                           config.tau, config.fixed_dim);
        if (config.l1_updates && !config.l1_override &&
            config.l1_update_source == LipschitzSource::SurrogateHessian) {
          lipschitz = l1_update(lipschitz, learned.hessian_norm, LipschitzSource::SurrogateHessian);
        }
      } catch (const std::exception&) {
        ++report.refit_failures;
      }
      report.j_history.push_back(learned.subspace.dim());
      set_rule(learned.subspace.dim());
    }
  }
  report.j_tilde = learned.subspace.dim();
  report.phase3_dim = learned.subspace.dim();
  report.l1_hat = config.l1_override.value_or(lipschitz.l1_hat);
  if (reference && reference->cols() == learned.subspace.dim()) {
    report.delta = subspace_distance(*reference, learned.subspace.active());
  }
}

/// Phase 3 without retraining.
inline void phase3_approx_astars(StarsState& s, const LearnedSubspace& learned,
                                 LipschitzEstimate& lipschitz, FaastarsConfig config,
                                 NoisyOracle& oracle, RngStream& rng, SampleLedger& ledger,
                                 PhaseReport& report) {
  config.retrain_every = 0;
  retrain_loop(s, learned, lipschitz, config, oracle, rng, ledger, report);
}

struct FaastarsResult {
  RunResult run;
  PhaseReport report;
};

/// Full pipeline: learn hyperparameters, burn in, then approximate ASTARS
/// (with retraining when configured).
inline FaastarsResult run_faastars(NoisyOracle& oracle, const Point& x0,
                                   const FaastarsConfig& config, RngStream& rng,
                                   SampleLedger& ledger,
                                   const std::optional<Matrix>& reference = std::nullopt) {
  if (config.maxit < 1) {
    throw std::invalid_argument("faastars: maxit must be >= 1");
  }
  if (!(config.tau > 0.0 && config.tau <= 1.0)) {
    throw std::invalid_argument("faastars: tau must lie in (0,1]");
  }
  const Phase1Result phase1 = phase1_learn(oracle, x0, rng, ledger, config);
  Phase2Result phase2 = phase2_burnin(oracle, x0, phase1, config, rng, ledger, reference);
  FaastarsResult out;
  if (!phase2.state.diverged) {
    retrain_loop(phase2.state, phase2.learned, phase2.lipschitz, config, oracle, rng, ledger,
                 phase2.report, reference);
  }
  out.report = std::move(phase2.report);
  out.run = finish(std::move(phase2.state));
  return out;
}

}  // namespace astars
