#pragma once

#include <stdexcept>

#include "astars/core.hpp"
#include "astars/stars.hpp"
#include "astars/subspace.hpp"

namespace astars {

/// A random direction confined to the active span: u = V_A r.
struct ActiveDirection {
  Vector full_vector;
  Vector coeffs;
};

/// Same formulas as the full-variable hyperparameters, with dim = j.
inline Hyperparameters active_hyperparameters(double sigma2, double l1, Eigen::Index j,
                                              NoiseKind kind,
                                              std::optional<double> f_value = std::nullopt) {
  return compute_hyperparameters(sigma2, l1, j, kind, f_value, Provenance::Exact);
}

inline ActiveDirection direction_from_coeffs(const ActiveSubspace& as, const Vector& r) {
  if (r.size() != as.dim()) {
    throw std::invalid_argument("active direction: coefficient count must equal j");
  }
  return ActiveDirection{as.basis().leftCols(as.dim()) * r, r};
}

/// Equal unit weights on the j active directions.
inline ActiveDirection draw_active_direction(const ActiveSubspace& as, RngStream& rng) {
  return direction_from_coeffs(as, rng.standard_normal(static_cast<std::size_t>(as.dim())));
}

/// Experimental eigenvalue weighting omega_i = sqrt(q_1 / q_i).
inline ActiveDirection draw_weighted_active_direction(const ActiveSubspace& as, RngStream& rng) {
  Vector r = rng.standard_normal(static_cast<std::size_t>(as.dim()));
  const double q1 = as.eigenvalues()[0];
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double qi = as.eigenvalues()[i];
    r[i] *= qi > 0.0 ? std::sqrt(q1 / qi) : 1.0;
  }
  return direction_from_coeffs(as, r);
}

inline std::optional<StepRecord> astars_step(StarsState& s, const ActiveSubspace& as,
                                             NoisyOracle& oracle, RngStream& rng,
                                             SampleLedger& ledger,
                                             SamplePhase tag = SamplePhase::Astars) {
  if (as.ambient_dim() != s.current.size()) {
    throw std::invalid_argument("astars step: subspace and iterate dimensions differ");
  }
  const ActiveDirection u = draw_active_direction(as, rng);
  return take_step(s, oracle, rng, ledger, u.full_vector, tag);
}

/// ASTARS with a subspace held fixed for the whole run. `rule.dim` must be j.
inline RunResult run_astars(NoisyOracle& oracle, const Point& x0, std::size_t maxit,
                            const ActiveSubspace& as, const StepRule& rule, RngStream& rng,
                            SampleLedger& ledger) {
  if (maxit < 1) {
    throw std::invalid_argument("run_astars: maxit must be >= 1");
  }
  if (rule.dim != as.dim()) {
    throw std::invalid_argument("run_astars: hyperparameters must be formed with dim = j");
  }
  StarsState s = init_state(oracle, x0, rule, rng, ledger, SamplePhase::Astars);
  while (s.k < maxit && !s.diverged) {
    astars_step(s, as, oracle, rng, ledger);
  }
  return finish(std::move(s));
}

}  // namespace astars
