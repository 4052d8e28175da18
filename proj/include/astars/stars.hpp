#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "astars/core.hpp"

namespace astars {

enum class Provenance { Exact, Estimated };

inline const char* to_string(Provenance p) {
  return p == Provenance::Exact ? "exact" : "estimated";
}

/// Smoothing factor and step size of one randomized-search configuration.
struct Hyperparameters {
  double mu = 0.0;
  double h = 0.0;
  Eigen::Index dim_used = 0;
  Provenance provenance = Provenance::Exact;
};

/// Optimal smoothing factor and step size for a search in `dim` directions.
///
/// Additive noise: mu = (8 s2 d / (L^2 (d+6)^3))^(1/4).
/// Multiplicative noise: mu = (16 s2 f^2 d / (L^2 (1+3 s2) (d+6)^3))^(1/4).
/// Both use h = 1 / (4 L (d+4)).
inline Hyperparameters compute_hyperparameters(double sigma2, double l1, Eigen::Index dim,
                                               NoiseKind kind,
                                               std::optional<double> f_value = std::nullopt,
                                               Provenance provenance = Provenance::Exact) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("hyperparameters: sigma2 must be positive");
  }
  if (!(l1 > 0.0) || !std::isfinite(l1)) {
    throw std::invalid_argument("hyperparameters: L1 must be positive");
  }
  if (dim < 1) {
    throw std::invalid_argument("hyperparameters: dimension must be >= 1");
  }
  const double d = static_cast<double>(dim);
  const double d6 = (d + 6.0) * (d + 6.0) * (d + 6.0);
  Hyperparameters out;
  out.dim_used = dim;
  out.provenance = provenance;
  out.h = 1.0 / (4.0 * l1 * (d + 4.0));
  if (kind == NoiseKind::Additive) {
    out.mu = std::pow(8.0 * sigma2 * d / (l1 * l1 * d6), 0.25);
  } else {
    if (!f_value || !std::isfinite(*f_value)) {
      throw std::invalid_argument("hyperparameters: multiplicative noise needs a finite f value");
    }
    const double f2 = (*f_value) * (*f_value);
    out.mu = std::pow(16.0 * sigma2 * f2 * d / (l1 * l1 * (1.0 + 3.0 * sigma2) * d6), 0.25);
  }
  return out;
}

/// Inputs from which per-iteration hyperparameters are formed.
struct StepRule {
  double sigma2 = 0.0;
  double l1 = 0.0;
  Eigen::Index dim = 0;
  NoiseKind kind = NoiseKind::Additive;
  Provenance provenance = Provenance::Exact;

  Hyperparameters at(double f_current) const {
    return compute_hyperparameters(
        sigma2, l1, dim, kind,
        kind == NoiseKind::Multiplicative ? std::optional<double>(f_current) : std::nullopt,
        provenance);
  }
};

/// Iterate state of a STARS-family run.
struct StarsState {
  Point current;
  double f_current = 0.0;  // stored noisy value at current, never re-evaluated
  std::size_t k = 0;
  StepRule rule;
  Hyperparameters hyper;
  TrialHistory history;
  bool diverged = false;
  double divergence_limit = 0.0;
  std::size_t aborted_evals = 0;
};

/// What one accepted step measured; feeds optional Lipschitz updates.
struct StepRecord {
  Point previous;
  double f_previous = 0.0;
  Point direction;
  double g = 0.0;
  double mu = 0.0;
  double h = 0.0;
  double slope = 0.0;  // (g - f_previous) / mu
};

inline bool blown_up(double v, double limit) { return !std::isfinite(v) || std::abs(v) > limit; }

/// Evaluates the starting point and seeds history and ledger.
inline StarsState init_state(NoisyOracle& oracle, const Point& x0, const StepRule& rule,
                             RngStream& rng, SampleLedger& ledger,
                             SamplePhase tag = SamplePhase::BurnIn) {
  if (static_cast<std::size_t>(x0.size()) != oracle.dim()) {
    throw std::invalid_argument("initial point has dimension " + std::to_string(x0.size()) +
                                ", oracle expects " + std::to_string(oracle.dim()));
  }
  StarsState s;
  s.current = x0;
  s.rule = rule;
  s.f_current = oracle.evaluate(x0, rng);
  ledger.record(x0, s.f_current, tag);
  if (!std::isfinite(s.f_current)) {
    s.diverged = true;
  }
  s.divergence_limit = 1e12 * (1.0 + std::abs(s.f_current));
  s.history.append(0, oracle.eval_count(), s.f_current, oracle.true_value(x0));
  return s;
}

/// One smoothed finite-difference step along u: exactly two oracle calls on
/// success. Returns nullopt and raises the divergence flag on blow-up.
inline std::optional<StepRecord> take_step(StarsState& s, NoisyOracle& oracle, RngStream& rng,
                                           SampleLedger& ledger, const Vector& u, SamplePhase tag) {
  if (s.diverged) {
    return std::nullopt;
  }
  s.hyper = s.rule.at(s.f_current);
  const double mu = s.hyper.mu;
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    s.diverged = true;
    return std::nullopt;
  }
  const Point perturbed = s.current + mu * u;
  const double g = oracle.evaluate(perturbed, rng);
  ledger.record(perturbed, g, tag);
  if (blown_up(g, s.divergence_limit)) {
    s.diverged = true;
    s.aborted_evals += 1;
    return std::nullopt;
  }
  StepRecord rec{s.current, s.f_current, u, g, mu, s.hyper.h, (g - s.f_current) / mu};
  const Point next = s.current - (s.hyper.h * rec.slope) * u;
  const double f_next = oracle.evaluate(next, rng);
  ledger.record(next, f_next, tag);
  if (blown_up(f_next, s.divergence_limit) || !next.allFinite()) {
    s.diverged = true;
    s.aborted_evals += 2;
    return std::nullopt;
  }
  s.current = next;
  s.f_current = f_next;
  ++s.k;
  s.history.append(s.k, oracle.eval_count(), f_next, oracle.true_value(next));
  return rec;
}

/// STARS step in all P variables.
inline std::optional<StepRecord> stars_step(StarsState& s, NoisyOracle& oracle, RngStream& rng,
                                            SampleLedger& ledger,
                                            SamplePhase tag = SamplePhase::BurnIn) {
  const Vector u = rng.standard_normal(static_cast<std::size_t>(s.current.size()));
  return take_step(s, oracle, rng, ledger, u, tag);
}

struct RunResult {
  TrialHistory history;
  Point final_point;
  double final_fhat = 0.0;
  bool diverged = false;
  std::size_t steps = 0;
  std::size_t aborted_evals = 0;
};

inline RunResult finish(StarsState&& s) {
  RunResult r;
  r.history = std::move(s.history);
  r.final_point = std::move(s.current);
  r.final_fhat = s.f_current;
  r.diverged = s.diverged;
  r.steps = s.k;
  r.aborted_evals = s.aborted_evals;
  return r;
}

/// Full-variable STARS for M iterations from x0.
inline RunResult run_stars(NoisyOracle& oracle, const Point& x0, std::size_t maxit,
                           const StepRule& rule, RngStream& rng, SampleLedger& ledger) {
  if (maxit < 1) {
    throw std::invalid_argument("run_stars: maxit must be >= 1");
  }
  if (rule.dim != x0.size()) {
    throw std::invalid_argument("run_stars: hyperparameters must be formed with dim = P");
  }
  StarsState s = init_state(oracle, x0, rule, rng, ledger);
  while (s.k < maxit && !s.diverged) {
    stars_step(s, oracle, rng, ledger);
  }
  return finish(std::move(s));
}

}  // namespace astars
