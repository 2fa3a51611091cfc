#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace ckylab {

using Vec = Eigen::VectorXd;
using Endo = Eigen::MatrixXd;

/// Result of a rank-revealing SVD: an orthonormal basis of the nullspace,
/// the numerical rank and the gap at the cut.
struct NullspaceResult {
  Eigen::MatrixXd basis;  // columns
  int rank = 0;
  /// smallest kept / largest dropped singular value; +inf when nothing was
  /// dropped or the matrix is exactly zero.
  double sv_gap = std::numeric_limits<double>::infinity();
  double sigma_max = 0.0;
};

inline NullspaceResult nullspace(const Eigen::MatrixXd& a, double rank_rel) {
  NullspaceResult out;
  const Eigen::Index cols = a.cols();
  if (cols == 0) {
    out.basis = Eigen::MatrixXd(0, 0);
    return out;
  }
  if (a.rows() == 0) {
    out.basis = Eigen::MatrixXd::Identity(cols, cols);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  out.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = rank_rel * out.sigma_max;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut && sv(i) > 0.0) ++rank;
  }
  out.rank = rank;
  if (rank > 0 && rank < sv.size() && sv(rank) > 0.0) {
    out.sv_gap = sv(rank - 1) / sv(rank);
  }
  out.basis = svd.matrixV().rightCols(cols - rank);
  return out;
}

inline int numerical_rank(const Eigen::MatrixXd& a, double rank_rel) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_rel * sv(0)) ++rank;
  }
  return rank;
}

/// Orthonormal (Euclidean) basis of the column space of `a`.
inline Eigen::MatrixXd column_space(const Eigen::MatrixXd& a, double rank_rel) {
  if (a.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > rank_rel * sv(0)) ++rank;
    }
  }
  return svd.matrixU().leftCols(rank);
}

/// F with F^T G F = I and det F > 0; its columns form a G-orthonormal frame
/// that is positively oriented with respect to the coordinate basis.
inline Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw PreconditionError("Gram matrix is not positive-definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  return l.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
}

/// G-orthonormal basis (columns) of the span of the columns of `vectors`.
inline Eigen::MatrixXd g_orthonormalize(const Eigen::MatrixXd& vectors,
                                        const Eigen::MatrixXd& gram,
                                        double rank_rel) {
  const Eigen::Index n = gram.rows();
  if (vectors.cols() == 0) return Eigen::MatrixXd(n, 0);
  const Eigen::MatrixXd frame = orthonormal_frame(gram);
  // In frame coordinates the metric is Euclidean.
  const Eigen::MatrixXd in_frame = frame.lu().solve(vectors);
  const Eigen::MatrixXd q = column_space(in_frame, rank_rel);
  return frame * q;
}

/// G-orthogonal projection of v onto the span of a G-orthonormal basis.
inline Vec g_project(const Vec& v, const Eigen::MatrixXd& basis,
                     const Eigen::MatrixXd& gram) {
  if (basis.cols() == 0) return Vec::Zero(v.size());
  return basis * (basis.transpose() * gram * v);
}

/// Columns of `basis` completing the G-orthogonal complement of `span`.
inline Eigen::MatrixXd g_orthogonal_complement(const Eigen::MatrixXd& span,
                                               const Eigen::MatrixXd& gram,
                                               double rank_rel) {
  const Eigen::Index n = gram.rows();
  if (span.cols() == 0) return g_orthonormalize(Eigen::MatrixXd::Identity(n, n), gram, rank_rel);
  // x is G-orthogonal to span iff (span^T G) x = 0.
  const Eigen::MatrixXd constraints = span.transpose() * gram;
  const NullspaceResult ns = nullspace(constraints, rank_rel);
  return g_orthonormalize(ns.basis, gram, rank_rel);
}

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace ckylab
