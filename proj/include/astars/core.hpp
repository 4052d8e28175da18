#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace astars {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in parameter space. Length is the problem dimension P.
using Point = Vector;

/// Deterministic objective f: R^P -> R (the noiseless signal).
using Objective = std::function<double(const Point&)>;

enum class NoiseKind { Additive, Multiplicative };

inline const char* to_string(NoiseKind kind) {
  return kind == NoiseKind::Additive ? "additive" : "multiplicative";
}

struct NoiseModel {
  NoiseKind kind = NoiseKind::Additive;
  double sigma2 = 0.0;
  // Multiplicative noise draws are rejected until |eps| < support_bound_a.
  double support_bound_a = 0.9;

  void validate() const {
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
      throw std::invalid_argument("noise variance must be finite and >= 0");
    }
    if (kind == NoiseKind::Multiplicative && !(support_bound_a > 0.0 && support_bound_a < 1.0)) {
      throw std::invalid_argument("multiplicative noise support bound must lie in (0,1)");
    }
  }
};

/// Reproducible per-trial random stream. Identical (seed, stream_id) pairs
/// reproduce identical draw sequences.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x5851f42dU};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double standard_normal() { return normal_(engine_); }

  Vector standard_normal(std::size_t n) {
    if (n == 0) {
      throw std::invalid_argument("standard_normal: n must be >= 1");
    }
    Vector out(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out[i] = normal_(engine_);
    }
    return out;
  }

  /// Uniformly distributed unit vector in R^n.
  Vector unit_vector(std::size_t n) {
    Vector v = standard_normal(n);
    double norm = v.norm();
    while (norm == 0.0) {
      v = standard_normal(n);
      norm = v.norm();
    }
    return v / norm;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Black-box objective with an attached noise model and evaluation counter.
class NoisyOracle {
 public:
  NoisyOracle(std::size_t dim, Objective objective, NoiseModel noise, bool true_value_access = true)
      : dim_(dim),
        objective_(std::move(objective)),
        noise_(noise),
        true_value_access_(true_value_access) {
    if (dim_ == 0) {
      throw std::invalid_argument("oracle dimension must be >= 1");
    }
    noise_.validate();
  }

  std::size_t dim() const { return dim_; }
  const NoiseModel& noise() const { return noise_; }
  std::size_t eval_count() const { return eval_count_; }
  bool has_true_value() const { return true_value_access_; }

  /// One noisy evaluation f(x)+eps or f(x)(1+eps). Always counts, even when
  /// the objective returns a non-finite value.
  double evaluate(const Point& x, RngStream& rng) {
    check_dim(x);
    ++eval_count_;
    const double f = objective_(x);
    if (noise_.sigma2 == 0.0) {
      return f;
    }
    const double sigma = std::sqrt(noise_.sigma2);
    if (noise_.kind == NoiseKind::Additive) {
      return f + sigma * rng.standard_normal();
    }
    double eps = sigma * rng.standard_normal();
    while (std::abs(eps) >= noise_.support_bound_a) {
      eps = sigma * rng.standard_normal();
    }
    return f * (1.0 + eps);
  }

  /// Noiseless read for benchmark reporting; not counted as an evaluation.
  std::optional<double> true_value(const Point& x) const {
    if (!true_value_access_) {
      return std::nullopt;
    }
    check_dim(x);
    return objective_(x);
  }

 private:
  void check_dim(const Point& x) const {
    if (static_cast<std::size_t>(x.size()) != dim_) {
      throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                  ", oracle expects " + std::to_string(dim_));
    }
  }

  std::size_t dim_;
  Objective objective_;
  NoiseModel noise_;
  bool true_value_access_;
  std::size_t eval_count_ = 0;
};

enum class SamplePhase { EcNoise, BurnIn, Astars };

inline const char* to_string(SamplePhase phase) {
  switch (phase) {
    case SamplePhase::EcNoise:
      return "ecnoise";
    case SamplePhase::BurnIn:
      return "burnin";
    case SamplePhase::Astars:
      return "astars";
  }
  return "?";
}

struct Sample {
  Point point;
  double value;
  SamplePhase phase;
};

/// Append-only store of every paid evaluation, shared by all phases.
class SampleLedger {
 public:
  /// Returns false (and counts the rejection) when the value is non-finite.
  bool record(const Point& x, double value, SamplePhase phase) {
    if (!x.allFinite()) {
      throw std::invalid_argument("ledger: sample point has non-finite coordinates");
    }
    if (!std::isfinite(value)) {
      ++rejected_;
      return false;
    }
    entries_.push_back(Sample{x, value, phase});
    return true;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t rejected() const { return rejected_; }
  const std::vector<Sample>& entries() const { return entries_; }
  const Sample& operator[](std::size_t i) const { return entries_[i]; }

  std::size_t count(SamplePhase phase) const {
    std::size_t n = 0;
    for (const auto& s : entries_) {
      n += s.phase == phase ? 1 : 0;
    }
    return n;
  }

  /// Sample points stacked as rows (S x P).
  Matrix points() const {
    if (entries_.empty()) {
      return Matrix();
    }
    Matrix out(static_cast<Eigen::Index>(entries_.size()), entries_.front().point.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = entries_[i].point.transpose();
    }
    return out;
  }

  Vector values() const {
    Vector out(static_cast<Eigen::Index>(entries_.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = entries_[i].value;
    }
    return out;
  }

 private:
  std::vector<Sample> entries_;
  std::size_t rejected_ = 0;
};

struct HistoryRow {
  std::size_t iteration;
  std::size_t fevals;
  double fhat;
  std::optional<double> ftrue;

  bool operator==(const HistoryRow&) const = default;
};

/// Per-iteration record of one optimizer run.
class TrialHistory {
 public:
  void append(std::size_t iteration, std::size_t fevals, double fhat, std::optional<double> ftrue) {
    if (!rows_.empty() && fevals < rows_.back().fevals) {
      throw std::logic_error("history: cumulative evaluations must be nondecreasing");
    }
    rows_.push_back(HistoryRow{iteration, fevals, fhat, ftrue});
  }

  const std::vector<HistoryRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const HistoryRow& back() const { return rows_.back(); }

  bool operator==(const TrialHistory&) const = default;

 private:
  std::vector<HistoryRow> rows_;
};

}  // namespace astars
