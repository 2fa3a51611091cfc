#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "exact.hpp"
#include "linalg.hpp"
#include "tolerance.hpp"

namespace ckylab {

/// Raw structure constants and Gram matrix over an arbitrary scalar field.
/// No validation happens here; MetricLieAlgebra validates on construction.
template <typename Scalar>
class StructureData {
 public:
  StructureData() = default;
  explicit StructureData(int dim, std::vector<std::string> labels = {})
      : dim_(dim), labels_(std::move(labels)),
        structure_(static_cast<std::size_t>(dim) * dim * dim, Scalar(0)),
        gram_(static_cast<std::size_t>(dim) * dim, Scalar(0)) {
    if (dim <= 0) throw InputError("algebra dimension must be positive");
    if (labels_.empty()) {
      for (int i = 0; i < dim; ++i) labels_.push_back("e" + std::to_string(i + 1));
    }
    if (static_cast<int>(labels_.size()) != dim) throw InputError("label count does not match dimension");
    for (int i = 0; i < dim; ++i) gram(i, i) = Scalar(1);
  }

  int dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }

  Scalar& c(int i, int j, int k) { return structure_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k]; }
  const Scalar& c(int i, int j, int k) const {
    return structure_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }
  Scalar& gram(int i, int j) { return gram_[static_cast<std::size_t>(i) * dim_ + j]; }
  const Scalar& gram(int i, int j) const { return gram_[static_cast<std::size_t>(i) * dim_ + j]; }

  /// Sets [e_i, e_j] = sum_k coeffs[k] e_k together with the antisymmetric entry.
  void set_bracket(int i, int j, const std::vector<std::pair<int, Scalar>>& coeffs) {
    check_index(i);
    check_index(j);
    if (i == j) {
      std::vector<Scalar> sum(dim_, Scalar(0));
      for (const auto& [k, v] : coeffs) {
        check_index(k);
        sum[k] += v;
      }
      for (const Scalar& v : sum) {
        if (v != Scalar(0)) throw InputError("[e_i, e_i] must vanish");
      }
    }
    for (int k = 0; k < dim_; ++k) {
      c(i, j, k) = Scalar(0);
      c(j, i, k) = Scalar(0);
    }
    for (const auto& [k, v] : coeffs) {
      check_index(k);
      c(i, j, k) += v;
      c(j, i, k) -= v;
    }
  }

  void set_metric_entry(int i, int j, const Scalar& v) {
    check_index(i);
    check_index(j);
    gram(i, j) = v;
    gram(j, i) = v;
  }

  /// Changes basis to the columns of `p` (new e'_a = sum_i p(i,a) e_i);
  /// `p_inv` must be the inverse of `p`.
  template <typename Mat>
  StructureData change_basis(const Mat& p, const Mat& p_inv, std::vector<std::string> labels = {}) const {
    StructureData out(dim_, labels.empty() ? labels_ : std::move(labels));
    const int n = dim_;
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        Scalar g(0);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) g += p(i, a) * gram(i, j) * p(j, b);
        }
        out.gram(a, b) = g;
        out.gram(b, a) = g;
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        std::vector<Scalar> image(n, Scalar(0));
        for (int i = 0; i < n; ++i) {
          if (p(i, a) == Scalar(0)) continue;
          for (int j = 0; j < n; ++j) {
            if (p(j, b) == Scalar(0)) continue;
            for (int k = 0; k < n; ++k) image[k] += p(i, a) * p(j, b) * c(i, j, k);
          }
        }
        for (int m = 0; m < n; ++m) {
          Scalar v(0);
          for (int k = 0; k < n; ++k) v += p_inv(m, k) * image[k];
          out.c(a, b, m) = v;
          out.c(b, a, m) = -v;
        }
      }
    }
    return out;
  }

  template <typename Other>
  StructureData<Other> cast() const {
    StructureData<Other> out(dim_, labels_);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        out.gram(i, j) = static_cast<Other>(gram(i, j));
        for (int k = 0; k < dim_; ++k) out.c(i, j, k) = static_cast<Other>(c(i, j, k));
      }
    }
    return out;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= dim_) throw InputError("basis index out of range");
  }

  int dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<Scalar> structure_;
  std::vector<Scalar> gram_;
};

/// Max over all ordered basis triples of the cyclic Jacobi sum, in the same
/// scalar type. Exact zero for valid algebras over exact fields. Ordered
/// triples, repeats included, so a tensor that is not antisymmetric is
/// measured too.
template <typename Scalar>
Scalar jacobi_defect(const StructureData<Scalar>& s) {
  const int n = s.dim();
  Scalar worst(0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        for (int m = 0; m < n; ++m) {
          Scalar sum(0);
          for (int k = 0; k < n; ++k) {
            sum += s.c(i, j, k) * s.c(k, l, m) + s.c(j, l, k) * s.c(k, i, m) + s.c(l, i, k) * s.c(k, j, m);
          }
          if (sum < Scalar(0)) sum = -sum;
          if (worst < sum) worst = sum;
        }
      }
    }
  }
  return worst;
}

/// Metric Lie algebra with real structure constants; immutable and validated.
class MetricLieAlgebra {
 public:
  MetricLieAlgebra(const StructureData<double>& data, ToleranceConfig tol = {})
      : dim_(data.dim()), labels_(data.labels()), tol_(tol) {
    tol_.validate();
    const int n = dim_;
    structure_.resize(static_cast<std::size_t>(n) * n * n);
    gram_ = Eigen::MatrixXd(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        gram_(i, j) = data.gram(i, j);
        for (int k = 0; k < n; ++k) structure_[idx(i, j, k)] = data.c(i, j, k);
      }
    }
    if (!structure_.empty() && !std::all_of(structure_.begin(), structure_.end(),
                                            [](double v) { return std::isfinite(v); })) {
      throw InputError("structure constants must be finite");
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          if (std::abs(c(i, j, k) + c(j, i, k)) > tol_.jacobi) {
            throw InputError("structure constants are not antisymmetric");
          }
        }
      }
    }
    if (!gram_.allFinite() || (gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > tol_.jacobi) {
      throw InputError("Gram matrix is not symmetric");
    }
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double v = 0.5 * (c(i, j, k) - c(j, i, k));
          structure_[idx(i, j, k)] = v;
          structure_[idx(j, i, k)] = -v;
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_);
    if (eig.eigenvalues().minCoeff() <= 0.0) throw InputError("Gram matrix is not positive-definite");
    const double jac = jacobi_residual();
    if (jac > tol_.jacobi) {
      throw InputError("Jacobi identity violated (residual " + std::to_string(jac) + ")");
    }
    gram_inv_ = gram_.inverse();
    ad_.reserve(n);
    for (int i = 0; i < n; ++i) {
      Endo m = Endo::Zero(n, n);
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) m(k, j) = c(i, j, k);
      }
      ad_.push_back(std::move(m));
    }
  }

  int dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const ToleranceConfig& tol() const { return tol_; }
  double c(int i, int j, int k) const { return structure_[idx(i, j, k)]; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& gram_inverse() const { return gram_inv_; }

  /// Matrix of ad_{e_i}: column j holds the coordinates of [e_i, e_j].
  const Endo& ad_basis(int i) const { return ad_[i]; }

  Endo ad(const Vec& x) const {
    check(x);
    Endo m = Endo::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      if (x(i) != 0.0) m += x(i) * ad_[i];
    }
    return m;
  }

  Vec bracket(const Vec& x, const Vec& y) const {
    check(y);
    return ad(x) * y;
  }

  double inner(const Vec& x, const Vec& y) const {
    check(x);
    check(y);
    return x.dot(gram_ * y);
  }

  double jacobi_residual() const {
    StructureData<double> tmp(dim_, labels_);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        for (int k = 0; k < dim_; ++k) tmp.c(i, j, k) = c(i, j, k);
      }
    }
    return jacobi_defect(tmp);
  }

  Vec basis_vector(int i) const { return Vec::Unit(dim_, i); }

  StructureData<double> data() const {
    StructureData<double> out(dim_, labels_);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        out.gram(i, j) = gram_(i, j);
        for (int k = 0; k < dim_; ++k) out.c(i, j, k) = c(i, j, k);
      }
    }
    return out;
  }

  MetricLieAlgebra with_tolerance(ToleranceConfig tol) const { return MetricLieAlgebra(data(), tol); }

 private:
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }
  void check(const Vec& x) const {
    if (x.size() != dim_) throw InputError("vector length does not match algebra dimension");
  }

  int dim_;
  std::vector<std::string> labels_;
  ToleranceConfig tol_;
  std::vector<double> structure_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd gram_inv_;
  std::vector<Endo> ad_;
};

inline Vec bracket(const MetricLieAlgebra& a, const Vec& x, const Vec& y) { return a.bracket(x, y); }

inline double jacobi_residual(const MetricLieAlgebra& a) { return a.jacobi_residual(); }

/// Basis (columns) of the center: the common kernel of all ad_{e_i}.
inline Eigen::MatrixXd center(const MetricLieAlgebra& a) {
  const int n = a.dim();
  Eigen::MatrixXd stacked(n * n, n);
  for (int i = 0; i < n; ++i) {
    // z is central iff [e_i, z] = 0 for all i.
    stacked.middleRows(i * n, n) = a.ad_basis(i);
  }
  return nullspace(stacked, a.tol().rank_rel).basis;
}

/// Orthonormal (Euclidean) basis of span{[e_i, e_j]}.
inline Eigen::MatrixXd derived_algebra(const MetricLieAlgebra& a) {
  const int n = a.dim();
  Eigen::MatrixXd images(n, n * n);
  for (int i = 0; i < n; ++i) images.middleCols(i * n, n) = a.ad_basis(i);
  return column_space(images, a.tol().rank_rel);
}

inline bool is_unimodular(const MetricLieAlgebra& a) {
  for (int i = 0; i < a.dim(); ++i) {
    if (std::abs(a.ad_basis(i).trace()) > a.tol().residual) return false;
  }
  return true;
}

namespace exact {

/// Dimension of the center computed by exact elimination.
template <typename Scalar>
std::size_t center_dimension(const StructureData<Scalar>& s) {
  const int n = s.dim();
  Matrix<Scalar> stacked(static_cast<std::size_t>(n) * n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) stacked(static_cast<std::size_t>(i) * n + k, j) = s.c(i, j, k);
    }
  }
  return nullity(stacked);
}

template <typename Scalar>
std::size_t derived_dimension(const StructureData<Scalar>& s) {
  const int n = s.dim();
  Matrix<Scalar> images(static_cast<std::size_t>(n) * n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) images(static_cast<std::size_t>(i) * n + j, k) = s.c(i, j, k);
    }
  }
  return rank(images);
}

}  // namespace exact

}  // namespace ckylab
