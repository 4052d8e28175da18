#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "astars/core.hpp"

namespace astars {

enum class SurrogateKind { Linear, Quadratic, Rbf };

inline const char* to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::Linear:
      return "linear";
    case SurrogateKind::Quadratic:
      return "quadratic";
    case SurrogateKind::Rbf:
      return "rbf";
  }
  return "?";
}

/// Samples required before a surrogate of this kind can be fit in dimension p.
inline std::size_t min_samples(SurrogateKind kind, std::size_t p) {
  switch (kind) {
    case SurrogateKind::Linear:
    case SurrogateKind::Rbf:
      return p + 1;
    case SurrogateKind::Quadratic:
      return (p + 1) * (p + 2) / 2;
  }
  return p + 1;
}

class SurrogateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SurrogateOptions {
  double ridge = 0.0;
  // Affine map of the samples' bounding box onto [-1,1]^P before fitting.
  bool normalize_inputs = false;
};

/// Closed-form response surface fit to (point, value) samples.
///
/// Linear and quadratic models are least-squares fits in a monomial basis;
/// the RBF model is a cubic kernel |x-c|^3 with a linear polynomial tail.
/// Inputs are shifted (and optionally box-normalized) internally; every
/// query and derivative is reported in the original coordinates.
class Surrogate {
 public:
  static Surrogate fit(SurrogateKind kind, const Matrix& points, const Vector& values,
                       const SurrogateOptions& options = {}) {
    const auto s = static_cast<std::size_t>(points.rows());
    const auto p = static_cast<std::size_t>(points.cols());
    if (p == 0 || values.size() != points.rows()) {
      throw std::invalid_argument("surrogate fit: points and values disagree in shape");
    }
    if (!(options.ridge >= 0.0) || !std::isfinite(options.ridge)) {
      throw std::invalid_argument("surrogate fit: ridge must be finite and >= 0");
    }
    const std::size_t need = min_samples(kind, p);
    if (s < need) {
      throw SurrogateFitError(std::string(to_string(kind)) + " surrogate needs min_samples=" +
                              std::to_string(need) + " samples, got " + std::to_string(s));
    }
    if (!points.allFinite() || !values.allFinite()) {
      throw std::invalid_argument("surrogate fit: non-finite sample");
    }

    Surrogate out;
    out.kind_ = kind;
    out.dim_ = points.cols();
    out.ridge_ = options.ridge;
    out.set_input_map(points, options.normalize_inputs);
    Eigen::Index best = 0;
    values.minCoeff(&best);
    out.best_point_ = points.row(best).transpose();

    const Matrix z = out.to_local(points);
    if (kind == SurrogateKind::Rbf) {
      out.fit_rbf(z, values);
    } else {
      out.fit_polynomial(z, values);
    }
    return out;
  }

  static Surrogate fit(SurrogateKind kind, const SampleLedger& ledger,
                       const SurrogateOptions& options = {}) {
    if (ledger.empty()) {
      throw SurrogateFitError("surrogate fit: empty ledger");
    }
    return fit(kind, ledger.points(), ledger.values(), options);
  }

  SurrogateKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  double ridge() const { return ridge_; }
  const Point& best_point() const { return best_point_; }

  /// Norm of the coefficients the ridge penalizes: monomial coefficients in
  /// centred inputs, or kernel weights plus tail for Rbf.
  double coefficient_norm() const { return solved_coefficients_.norm(); }

  double predict(const Point& x) const {
    check(x);
    const Vector z = scale_.cwiseProduct(x - shift_);
    switch (kind_) {
      case SurrogateKind::Linear:
        return constant_ + linear_.dot(z);
      case SurrogateKind::Quadratic:
        return constant_ + linear_.dot(z) + 0.5 * z.dot(hessian_z_ * z);
      case SurrogateKind::Rbf: {
        double v = constant_ + linear_.dot(z);
        for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
          const double r = (z - centers_.row(i).transpose()).norm();
          v += weights_[i] * r * r * r;
        }
        return v;
      }
    }
    return 0.0;
  }

  /// Exact gradient of the surrogate formula.
  Vector gradient_at(const Point& x) const {
    check(x);
    const Vector z = scale_.cwiseProduct(x - shift_);
    Vector gz = linear_;
    if (kind_ == SurrogateKind::Quadratic) {
      gz.noalias() += hessian_z_ * z;
    } else if (kind_ == SurrogateKind::Rbf) {
      for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
        const Vector r = z - centers_.row(i).transpose();
        gz += (3.0 * weights_[i] * r.norm()) * r;
      }
    }
    return scale_.cwiseProduct(gz);
  }

  Matrix hessian_at(const Point& x) const {
    check(x);
    Matrix hz = Matrix::Zero(dim_, dim_);
    if (kind_ == SurrogateKind::Quadratic) {
      hz = hessian_z_;
    } else if (kind_ == SurrogateKind::Rbf) {
      const Vector z = scale_.cwiseProduct(x - shift_);
      for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
        const Vector r = z - centers_.row(i).transpose();
        const double nr = r.norm();
        if (nr == 0.0) {
          continue;
        }
        hz.diagonal().array() += 3.0 * weights_[i] * nr;
        hz.noalias() += (3.0 * weights_[i] / nr) * r * r.transpose();
      }
    }
    return scale_.asDiagonal() * hz * scale_.asDiagonal();
  }

  /// Spectral norm of the Hessian: constant for quadratics, evaluated at the
  /// best-seen sample for RBFs, zero for linear models.
  double hessian_spectral_norm() const {
    if (kind_ == SurrogateKind::Linear) {
      return 0.0;
    }
    const Matrix h = hessian_at(best_point_);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  /// Linear-model coefficients in original coordinates: f(x) ~ intercept + slope.x
  double linear_intercept() const { return constant_ - linear_.dot(scale_.cwiseProduct(shift_)); }
  Vector linear_slope() const { return scale_.cwiseProduct(linear_); }

 private:
  static constexpr double kRankTolerance = 1e-13;

  void check(const Point& x) const {
    if (x.size() != dim_) {
      throw std::invalid_argument("surrogate: point has dimension " + std::to_string(x.size()) +
                                  ", model has " + std::to_string(dim_));
    }
  }

  void set_input_map(const Matrix& points, bool normalize) {
    const Eigen::Index p = points.cols();
    if (normalize) {
      const Vector lo = points.colwise().minCoeff().transpose();
      const Vector hi = points.colwise().maxCoeff().transpose();
      shift_ = 0.5 * (lo + hi);
      scale_ = Vector::Ones(p);
      for (Eigen::Index i = 0; i < p; ++i) {
        if (hi[i] > lo[i]) {
          scale_[i] = 2.0 / (hi[i] - lo[i]);
        }
      }
      return;
    }
    shift_ = points.colwise().mean().transpose();
    scale_ = Vector::Ones(p);
    if (kind_ == SurrogateKind::Rbf) {
      // isotropic length scale keeps the radial kernel radial
      const Matrix centered = points.rowwise() - shift_.transpose();
      const double spread = std::sqrt(centered.colwise().squaredNorm().maxCoeff() /
                                      static_cast<double>(points.rows()));
      if (spread > 0.0) {
        scale_.setConstant(1.0 / spread);
      }
    }
  }

  Matrix to_local(const Matrix& points) const {
    return (points.rowwise() - shift_.transpose()) * scale_.asDiagonal();
  }

  Eigen::Index feature_count() const {
    const Eigen::Index p = dim_;
    return kind_ == SurrogateKind::Linear ? p + 1 : (p + 1) * (p + 2) / 2;
  }

  void fit_polynomial(const Matrix& z, const Vector& y) {
    const Eigen::Index s = z.rows();
    const Eigen::Index p = dim_;
    const Eigen::Index n = feature_count();
    Matrix a(s, n);
    for (Eigen::Index r = 0; r < s; ++r) {
      a(r, 0) = 1.0;
      for (Eigen::Index i = 0; i < p; ++i) {
        a(r, 1 + i) = z(r, i);
      }
      if (kind_ == SurrogateKind::Quadratic) {
        Eigen::Index c = 1 + p;
        for (Eigen::Index i = 0; i < p; ++i) {
          for (Eigen::Index j = i; j < p; ++j) {
            a(r, c++) = z(r, i) * z(r, j);
          }
        }
      }
    }
    // unit-norm columns
    Vector col_scale = a.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < n; ++c) {
      if (col_scale[c] == 0.0) {
        col_scale[c] = 1.0;
      }
    }
    a = a * col_scale.cwiseInverse().asDiagonal();

    Matrix gram = Matrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    // ridge on the unscaled monomial coefficients
    gram.diagonal().array() += ridge_ * col_scale.array().square().inverse();
    const Vector rhs = a.transpose() * y;
    Eigen::LDLT<Matrix> ldlt(gram.selfadjointView<Eigen::Lower>());
    const Vector pivots = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= kRankTolerance * pivots.maxCoeff()) {
      throw SurrogateFitError(
          std::string(to_string(kind_)) + " surrogate: rank-deficient design (" +
          std::to_string(n) +
          " coefficients, samples do not determine them; ridge=" + std::to_string(ridge_) + ")");
    }
    solved_coefficients_ = ldlt.solve(rhs);
    if (!solved_coefficients_.allFinite()) {
      throw SurrogateFitError("surrogate: non-finite coefficients");
    }
    const Vector theta = solved_coefficients_.cwiseQuotient(col_scale);
    solved_coefficients_ = theta;

    constant_ = theta[0];
    linear_ = theta.segment(1, p);
    hessian_z_ = Matrix::Zero(p, p);
    if (kind_ == SurrogateKind::Quadratic) {
      Eigen::Index c = 1 + p;
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
          if (i == j) {
            hessian_z_(i, i) = 2.0 * theta[c];
          } else {
            hessian_z_(i, j) = theta[c];
            hessian_z_(j, i) = theta[c];
          }
          ++c;
        }
      }
    }
  }

  void fit_rbf(const Matrix& z, const Vector& y) {
    const Eigen::Index s = z.rows();
    const Eigen::Index p = dim_;
    const Eigen::Index tail = p + 1;
    Matrix tail_block(s, tail);
    tail_block.col(0).setOnes();
    tail_block.rightCols(p) = z;
    if (ridge_ == 0.0) {
      Eigen::ColPivHouseholderQR<Matrix> qr(tail_block);
      if (qr.rank() < tail) {
        throw SurrogateFitError(
            "rbf surrogate: rank-deficient design, samples span an affine "
            "space of dimension " +
            std::to_string(qr.rank() - 1) + " < P=" + std::to_string(p));
      }
    }

    Matrix system = Matrix::Zero(s + tail, s + tail);
    for (Eigen::Index i = 0; i < s; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const double r = (z.row(i) - z.row(j)).norm();
        system(i, j) = r * r * r;
        system(j, i) = system(i, j);
      }
      system(i, i) = ridge_;
    }
    system.topRightCorner(s, tail) = tail_block;
    system.bottomLeftCorner(tail, s) = tail_block.transpose();
    system.bottomRightCorner(tail, tail).diagonal().setConstant(-ridge_);

    Vector rhs = Vector::Zero(s + tail);
    rhs.head(s) = y;
    Eigen::PartialPivLU<Matrix> lu(system);
    solved_coefficients_ = lu.solve(rhs);
    const double residual = (system * solved_coefficients_ - rhs).norm();
    if (!solved_coefficients_.allFinite() || residual > 1e-6 * (rhs.norm() + 1.0)) {
      throw SurrogateFitError("rbf surrogate: singular interpolation system (duplicate centers?)");
    }
    weights_ = solved_coefficients_.head(s);
    constant_ = solved_coefficients_[s];
    linear_ = solved_coefficients_.tail(p);
    centers_ = z;
  }

  SurrogateKind kind_ = SurrogateKind::Linear;
  Eigen::Index dim_ = 0;
  double ridge_ = 0.0;
  Vector shift_;
  Vector scale_;
  Point best_point_;
  Vector solved_coefficients_;

  double constant_ = 0.0;
  Vector linear_;
  Matrix hessian_z_;  // quadratic only
  Matrix centers_;    // rbf only, local coordinates
  Vector weights_;    // rbf only
};

}  // namespace astars
