#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "astars/core.hpp"

namespace astars {

enum class NoiseConfidence { Accepted, Weak };

struct NoiseEstimate {
  double sigma2_hat = 0.0;
  NoiseConfidence confidence = NoiseConfidence::Weak;
  std::size_t samples_used = 0;
  // Difference-table order the estimate came from (1-based).
  std::size_t level = 0;
};

enum class LipschitzSource { FiniteDifference, SurrogateHessian };

struct LipschitzEstimate {
  double l1_hat = 0.0;
  LipschitzSource source = LipschitzSource::FiniteDifference;
  std::vector<double> history;  // accepted values, nondecreasing
};

/// Line samples produced by one ECNoise run.
struct LineSamples {
  Point base;
  Point direction;
  double spacing = 0.0;
  std::vector<double> offsets;
  std::vector<double> values;
};

struct EcNoiseResult {
  NoiseEstimate estimate;
  LineSamples line;
};

inline constexpr std::size_t kDefaultEcNoiseSamples = 8;
inline constexpr double kLipschitzFloor = 1e-8;

inline double default_ecnoise_spacing(const Point& base) { return 1e-2 * (1.0 + base.norm()); }

/// Difference-table noise estimate from equally spaced values along a line.
///
/// Level k uses gamma_k * mean((Delta^k f)^2), gamma_k = (k!)^2/(2k)!, which is
/// unbiased for sigma^2 when the k-th differences are pure noise. The first
/// level whose estimate agrees with the next one within a factor of 4 and
/// whose differences change sign is accepted. Otherwise the smallest
/// estimate over all levels is returned, flagged weak.
inline NoiseEstimate estimate_noise(std::span<const double> values,
                                    NoiseKind kind = NoiseKind::Additive) {
  const std::size_t m = values.size();
  if (m < 3) {
    throw std::invalid_argument("estimate_noise: need at least 3 values");
  }
  std::vector<double> diff(values.begin(), values.end());
  std::vector<double> level_est;
  std::vector<bool> sign_change;
  double gamma = 1.0;
  for (std::size_t k = 1; k < m; ++k) {
    for (std::size_t i = 0; i + k < m; ++i) {
      diff[i] = diff[i + 1] - diff[i];
    }
    const std::size_t n = m - k;
    // gamma_k = gamma_{k-1} * k^2 / ((2k-1)(2k))
    gamma *= static_cast<double>(k * k) / static_cast<double>((2 * k - 1) * (2 * k));
    double sum_sq = 0.0;
    double lo = diff[0];
    double hi = diff[0];
    for (std::size_t i = 0; i < n; ++i) {
      sum_sq += diff[i] * diff[i];
      lo = std::min(lo, diff[i]);
      hi = std::max(hi, diff[i]);
    }
    level_est.push_back(gamma * sum_sq / static_cast<double>(n));
    sign_change.push_back(lo < 0.0 && hi > 0.0);
  }

  NoiseEstimate out;
  out.samples_used = m;
  for (std::size_t k = 0; k + 1 < level_est.size(); ++k) {
    const double a = level_est[k];
    const double b = level_est[k + 1];
    if (sign_change[k] && a > 0.0 && b > 0.0 && std::max(a, b) <= 4.0 * std::min(a, b)) {
      out.sigma2_hat = a;
      out.level = k + 1;
      out.confidence = NoiseConfidence::Accepted;
      break;
    }
  }
  if (out.confidence == NoiseConfidence::Weak) {
    const auto it = std::min_element(level_est.begin(), level_est.end());
    out.sigma2_hat = *it;
    out.level = static_cast<std::size_t>(it - level_est.begin()) + 1;
  }
  if (kind == NoiseKind::Multiplicative) {
    // relative noise: the table measured sigma^2 * f(base)^2
    double mean = 0.0;
    for (double v : values) {
      mean += v;
    }
    mean /= static_cast<double>(m);
    out.sigma2_hat = mean != 0.0 ? out.sigma2_hat / (mean * mean) : 0.0;
  }
  return out;
}

/// Evaluates the oracle at m equally spaced points centred on base along
/// direction and estimates the noise variance from them.
inline EcNoiseResult ecnoise(NoisyOracle& oracle, const Point& base, const Point& direction,
                             double spacing, std::size_t m, RngStream& rng, SampleLedger& ledger) {
  if (m < 6) {
    throw std::invalid_argument("ecnoise: need m >= 6 samples");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("ecnoise: spacing must be positive");
  }
  const double dnorm = direction.norm();
  if (!(dnorm > 0.0) || direction.size() != base.size()) {
    throw std::invalid_argument("ecnoise: direction must be a nonzero vector of the base's length");
  }
  EcNoiseResult out;
  out.line.base = base;
  out.line.direction = direction / dnorm;
  out.line.spacing = spacing;
  const double centre = 0.5 * static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = (static_cast<double>(i) - centre) * spacing;
    const Point x = base + t * out.line.direction;
    const double v = oracle.evaluate(x, rng);
    ledger.record(x, v, SamplePhase::EcNoise);
    if (!std::isfinite(v)) {
      throw std::runtime_error("ecnoise: oracle returned a non-finite value");
    }
    out.line.offsets.push_back(t);
    out.line.values.push_back(v);
  }
  out.estimate = estimate_noise(out.line.values, oracle.noise().kind);
  return out;
}

/// Largest centred second difference |f(t-d) - 2f(t) + f(t+d)| / d^2 over
/// the interior of an equally spaced line sample, floored at 1e-8.
inline LipschitzEstimate l1_init(std::span<const double> line_values, double spacing) {
  if (line_values.size() < 3) {
    throw std::invalid_argument("l1_init: need at least 3 collinear samples");
  }
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("l1_init: spacing must be positive");
  }
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < line_values.size(); ++i) {
    const double second = line_values[i - 1] - 2.0 * line_values[i] + line_values[i + 1];
    best = std::max(best, std::abs(second) / (spacing * spacing));
  }
  LipschitzEstimate out;
  out.l1_hat = std::max(best, kLipschitzFloor);
  out.source = LipschitzSource::FiniteDifference;
  out.history.push_back(out.l1_hat);
  return out;
}

/// Accepts the candidate only when it is strictly more pessimistic.
inline LipschitzEstimate l1_update(LipschitzEstimate current, double candidate,
                                   LipschitzSource source = LipschitzSource::FiniteDifference) {
  if (std::isfinite(candidate) && candidate > 0.0 && candidate > current.l1_hat) {
    current.l1_hat = candidate;
    current.source = source;
    current.history.push_back(candidate);
  }
  return current;
}

/// Curvature of the parabola through three collinear samples at arbitrary
/// offsets (twice the second divided difference). Returns nullopt when two
/// offsets coincide.
inline std::optional<double> curvature_from_samples(double t0, double f0, double t1, double f1,
                                                    double t2, double f2) {
  const double d01 = t1 - t0;
  const double d12 = t2 - t1;
  const double d02 = t2 - t0;
  const double tiny = 1e-14 * std::max({std::abs(t0), std::abs(t1), std::abs(t2), 1e-300});
  if (std::abs(d01) <= tiny || std::abs(d12) <= tiny || std::abs(d02) <= tiny) {
    return std::nullopt;
  }
  const double first01 = (f1 - f0) / d01;
  const double first12 = (f2 - f1) / d12;
  return std::abs(2.0 * (first12 - first01) / d02);
}

}  // namespace astars
