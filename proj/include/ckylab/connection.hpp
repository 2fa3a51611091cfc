#pragma once

#include <Eigen/Dense>
#include <vector>

#include "linalg.hpp"
#include "liealg.hpp"

namespace ckylab {

/// Levi-Civita connection of a metric Lie algebra: nabla(i) is the matrix of
/// nabla_{e_i}, so column j holds the coordinates of nabla_{e_i} e_j.
class Connection {
 public:
  Connection(const MetricLieAlgebra& algebra, std::vector<Endo> nabla)
      : algebra_(algebra), nabla_(std::move(nabla)) {}

  const MetricLieAlgebra& algebra() const { return algebra_; }
  int dim() const { return algebra_.dim(); }
  const Endo& nabla(int i) const { return nabla_[i]; }
  const std::vector<Endo>& nabla() const { return nabla_; }

  /// nabla_x for an arbitrary direction x.
  Endo along(const Vec& x) const {
    Endo m = Endo::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) {
      if (x(i) != 0.0) m += x(i) * nabla_[i];
    }
    return m;
  }

  /// max |<nabla_x y, z> + <y, nabla_x z>| over basis triples.
  double metric_residual() const {
    double worst = 0.0;
    for (const Endo& m : nabla_) {
      const Eigen::MatrixXd gm = algebra_.gram() * m;
      worst = std::max(worst, max_abs(gm + gm.transpose()));
    }
    return worst;
  }

  /// max |nabla_{e_i} e_j - nabla_{e_j} e_i - [e_i, e_j]| over basis pairs.
  double torsion_residual() const {
    double worst = 0.0;
    const int n = dim();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Vec t = nabla_[i].col(j) - nabla_[j].col(i) - algebra_.ad_basis(i).col(j);
        worst = std::max(worst, t.cwiseAbs().maxCoeff());
      }
    }
    return worst;
  }

 private:
  MetricLieAlgebra algebra_;
  std::vector<Endo> nabla_;
};

/// 2<nabla_x y, z> = <[x,y],z> - <[y,z],x> + <[z,x],y>.
inline Connection levi_civita(const MetricLieAlgebra& a) {
  const int n = a.dim();
  const Eigen::MatrixXd& g = a.gram();
  // lowered(i, j)(k) = <[e_i, e_j], e_k>
  auto lowered = [&](int i, int j, int k) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) s += a.c(i, j, m) * g(m, k);
    return s;
  };
  std::vector<Endo> nabla;
  nabla.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd low(n, n);  // low(k, j) = <nabla_i e_j, e_k>
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        low(k, j) = 0.5 * (lowered(i, j, k) - lowered(j, k, i) + lowered(k, i, j));
      }
    }
    nabla.push_back(a.gram_inverse() * low);
  }
  return Connection(a, std::move(nabla));
}

/// (nabla_x T) = [nabla_x, T] for an endomorphism T.
inline Endo covariant_derivative(const Connection& conn, const Vec& x, const Endo& t) {
  if (t.rows() != conn.dim() || t.cols() != conn.dim()) {
    throw InputError("endomorphism shape does not match algebra dimension");
  }
  const Endo nx = conn.along(x);
  return nx * t - t * nx;
}

/// R(x,y) = nabla_{[x,y]} - [nabla_x, nabla_y].
inline Endo curvature(const Connection& conn, const Vec& x, const Vec& y) {
  const Endo nx = conn.along(x);
  const Endo ny = conn.along(y);
  return conn.along(conn.algebra().bracket(x, y)) - (nx * ny - ny * nx);
}

struct HolonomyReport {
  int dimension = 0;
  std::vector<Endo> basis;
  int iterations = 0;
  bool converged = false;
};

/// Infinitesimal holonomy algebra: the span of the curvature endomorphisms
/// closed under commutators and under B -> [nabla_{e_k}, B]. Stops early once
/// the span reaches dim so(n).
inline HolonomyReport holonomy_algebra(const MetricLieAlgebra& a, int max_iterations = 20) {
  const Connection conn = levi_civita(a);
  const int n = a.dim();
  const int max_dim = n * (n - 1) / 2;
  // Work in a G-orthonormal frame where skew endomorphisms are skew matrices.
  const Eigen::MatrixXd frame = orthonormal_frame(a.gram());
  const Eigen::MatrixXd frame_inv = frame.inverse();
  auto to_frame = [&](const Endo& m) -> Eigen::MatrixXd { return frame_inv * m * frame; };
  auto from_frame = [&](const Eigen::MatrixXd& m) -> Endo { return frame * m * frame_inv; };

  std::vector<Eigen::MatrixXd> connection_frame;
  for (int k = 0; k < n; ++k) connection_frame.push_back(to_frame(conn.nabla(k)));

  HolonomyReport report;
  std::vector<Eigen::MatrixXd> basis;  // Frobenius-orthonormal, frame coordinates
  double scale = 0.0;
  std::vector<Eigen::MatrixXd> generators;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      generators.push_back(to_frame(curvature(conn, a.basis_vector(i), a.basis_vector(j))));
      scale = std::max(scale, generators.back().norm());
    }
  }
  for (const Eigen::MatrixXd& c : connection_frame) scale = std::max(scale, c.norm());
  if (scale == 0.0) {
    report.converged = true;
    return report;
  }
  auto try_add = [&](const Eigen::MatrixXd& cand) {
    if (static_cast<int>(basis.size()) >= max_dim) return false;
    Eigen::MatrixXd r = cand;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Eigen::MatrixXd& b : basis) r -= (b.cwiseProduct(r)).sum() * b;
    }
    const double nr = r.norm();
    if (nr <= 1e-9 * std::max(scale, cand.norm())) return false;
    basis.push_back(r / nr);
    return true;
  };
  for (const Eigen::MatrixXd& g : generators) try_add(g);

  int iteration = 0;
  bool grew = !basis.empty();
  while (grew && static_cast<int>(basis.size()) < max_dim && iteration < max_iterations) {
    ++iteration;
    grew = false;
    const std::vector<Eigen::MatrixXd> current = basis;
    for (std::size_t p = 0; p < current.size(); ++p) {
      for (std::size_t q = p + 1; q < current.size(); ++q) {
        grew |= try_add(current[p] * current[q] - current[q] * current[p]);
      }
      for (const Eigen::MatrixXd& c : connection_frame) {
        grew |= try_add(c * current[p] - current[p] * c);
      }
    }
  }
  report.iterations = iteration;
  report.converged = !grew || static_cast<int>(basis.size()) >= max_dim;
  report.dimension = static_cast<int>(basis.size());
  for (const Eigen::MatrixXd& b : basis) report.basis.push_back(from_frame(b));
  return report;
}

}  // namespace ckylab
