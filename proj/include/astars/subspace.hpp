#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "astars/core.hpp"

namespace astars {

/// Monte Carlo estimate (1/S) sum g g^T of the gradient outer-product matrix.
struct SensitivityMatrix {
  Matrix entries;
  std::size_t sample_count = 0;
};

/// Eigen-pairs of a sensitivity matrix, descending.
struct Eigensystem {
  Vector eigenvalues;
  Matrix basis;  // columns are eigenvectors
};

/// Orthonormal split of parameter space into active and inactive directions.
class ActiveSubspace {
 public:
  ActiveSubspace() = default;

  ActiveSubspace(Matrix basis, Vector eigenvalues, Eigen::Index dim, double threshold)
      : basis_(std::move(basis)),
        eigenvalues_(std::move(eigenvalues)),
        dim_(dim),
        threshold_(threshold) {
    if (basis_.rows() != basis_.cols() || eigenvalues_.size() != basis_.cols()) {
      throw std::invalid_argument("active subspace: basis must be square and match eigenvalues");
    }
    if (dim_ < 1 || dim_ > basis_.cols()) {
      throw std::invalid_argument("active subspace: dimension out of range");
    }
  }

  /// Exact subspace spanned by the given orthonormal-able columns; the
  /// complement is filled by a QR completion.
  static ActiveSubspace from_active_columns(const Matrix& active) {
    const Eigen::Index p = active.rows();
    const Eigen::Index j = active.cols();
    if (j < 1 || j > p) {
      throw std::invalid_argument("active subspace: need 1 <= j <= P columns");
    }
    Eigen::HouseholderQR<Matrix> qr(active);
    Matrix q = qr.householderQ() * Matrix::Identity(p, p);
    // keep the supplied orientation of the active columns
    for (Eigen::Index c = 0; c < j; ++c) {
      if (q.col(c).dot(active.col(c)) < 0.0) {
        q.col(c) *= -1.0;
      }
    }
    Vector eig = Vector::Zero(p);
    eig.head(j).setOnes();
    return ActiveSubspace(std::move(q), std::move(eig), j, 1.0);
  }

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return dim_; }
  double threshold() const { return threshold_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& basis() const { return basis_; }
  Matrix active() const { return basis_.leftCols(dim_); }
  Matrix inactive() const { return basis_.rightCols(basis_.cols() - dim_); }

  Point project_active(const Point& x) const {
    check(x);
    const auto va = basis_.leftCols(dim_);
    return va * (va.transpose() * x);
  }

  Point project_inactive(const Point& x) const {
    check(x);
    const auto vi = basis_.rightCols(basis_.cols() - dim_);
    return vi * (vi.transpose() * x);
  }

 private:
  void check(const Point& x) const {
    if (x.size() != basis_.rows()) {
      throw std::invalid_argument("projection: point has dimension " + std::to_string(x.size()) +
                                  ", subspace lives in " + std::to_string(basis_.rows()));
    }
  }

  Matrix basis_;
  Vector eigenvalues_;
  Eigen::Index dim_ = 0;
  double threshold_ = 1.0;
};

inline SensitivityMatrix build_sensitivity(std::span<const Vector> gradients) {
  if (gradients.empty()) {
    throw std::invalid_argument("build_sensitivity: need at least one gradient");
  }
  const Eigen::Index p = gradients.front().size();
  Matrix stack(static_cast<Eigen::Index>(gradients.size()), p);
  for (std::size_t i = 0; i < gradients.size(); ++i) {
    if (gradients[i].size() != p) {
      throw std::invalid_argument("build_sensitivity: gradients differ in length");
    }
    stack.row(static_cast<Eigen::Index>(i)) = gradients[i].transpose();
  }
  Matrix w = Matrix::Zero(p, p);
  w.selfadjointView<Eigen::Lower>().rankUpdate(stack.transpose(),
                                               1.0 / static_cast<double>(gradients.size()));
  w.triangularView<Eigen::StrictlyUpper>() = w.transpose();
  return SensitivityMatrix{std::move(w), gradients.size()};
}

inline Eigensystem eigendecompose(const Matrix& w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw std::invalid_argument("eigendecompose: matrix must be square and nonempty");
  }
  const double scale = std::max(w.cwiseAbs().maxCoeff(), 1e-300);
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("eigendecompose: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecompose: solver did not converge");
  }
  const Eigen::Index p = w.rows();
  Eigensystem out{Vector(p), Matrix(p, p)};
  for (Eigen::Index i = 0; i < p; ++i) {
    out.eigenvalues[i] = solver.eigenvalues()[p - 1 - i];
    out.basis.col(i) = solver.eigenvectors().col(p - 1 - i);
  }
  const double q1 = std::max(out.eigenvalues[0], 0.0);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (out.eigenvalues[i] < 0.0) {
      if (out.eigenvalues[i] < -1e-10 * q1) {
        throw std::invalid_argument("eigendecompose: matrix is not positive semi-definite");
      }
      out.eigenvalues[i] = 0.0;
    }
  }
  return out;
}

inline Eigensystem eigendecompose(const SensitivityMatrix& w) { return eigendecompose(w.entries); }

/// Smallest j with q_1+...+q_j >= tau * (q_1+...+q_P).
inline Eigen::Index select_dimension(const Vector& eigenvalues, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("select_dimension: tau must lie in (0,1]");
  }
  if (eigenvalues.size() == 0) {
    throw std::invalid_argument("select_dimension: empty spectrum");
  }
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] < 0.0 || (i > 0 && eigenvalues[i] > eigenvalues[i - 1])) {
      throw std::invalid_argument("select_dimension: eigenvalues must be nonnegative, descending");
    }
  }
  const double total = eigenvalues.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("select_dimension: all-zero spectrum has no subspace structure");
  }
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
    cumulative += eigenvalues[j];
    if (cumulative >= tau * total) {
      return j + 1;
    }
  }
  return eigenvalues.size();
}

/// Eigendecompose, threshold, and package. A fixed dimension overrides tau.
inline ActiveSubspace make_active_subspace(const SensitivityMatrix& w, double tau,
                                           std::optional<Eigen::Index> fixed_dim = std::nullopt) {
  Eigensystem es = eigendecompose(w);
  Eigen::Index j = 0;
  if (fixed_dim) {
    j = std::clamp<Eigen::Index>(*fixed_dim, 1, es.basis.cols());
  } else {
    j = select_dimension(es.eigenvalues, tau);
  }
  return ActiveSubspace(std::move(es.basis), std::move(es.eigenvalues), j, tau);
}

/// Spectral norm of V - V~ after flipping each column of V~ to its closer sign.
inline double subspace_distance(const Matrix& v, const Matrix& v_tilde) {
  if (v.rows() != v_tilde.rows() || v.cols() != v_tilde.cols()) {
    throw std::invalid_argument("subspace_distance: basis shapes differ");
  }
  Matrix aligned = v_tilde;
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    if ((v.col(c) + aligned.col(c)).norm() < (v.col(c) - aligned.col(c)).norm()) {
      aligned.col(c) *= -1.0;
    }
  }
  Eigen::JacobiSVD<Matrix> svd(v - aligned);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

/// CSV rows: index, eigenvalue, then the entries of that eigenvector.
inline void write_subspace_csv(std::ostream& os, const Vector& eigenvalues, const Matrix& basis) {
  os << "index,eigenvalue";
  for (Eigen::Index r = 0; r < basis.rows(); ++r) {
    os << ",v" << (r + 1);
  }
  os << '\n';
  os.precision(17);
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    os << (c + 1) << ',' << eigenvalues[c];
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      os << ',' << basis(r, c);
    }
    os << '\n';
  }
}

}  // namespace astars
