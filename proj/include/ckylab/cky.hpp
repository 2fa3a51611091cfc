#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "connection.hpp"
#include "errors.hpp"
#include "forms.hpp"
#include "liealg.hpp"
#include "linalg.hpp"
#include "multi_index.hpp"

namespace ckylab {

enum class FormKind { cky, ky, star_ky, parallel };

/// "general" is the p-form equation nabla_x eta = 1/(p+1) iota_x d eta
/// - 1/(n-p+1) x^flat ^ d* eta; "symmetrized" is the 2-form equation
/// (nabla_x w)(y,z) + (nabla_y w)(x,z) = 2<x,y>theta(z) - <y,z>theta(x) - <x,z>theta(y)
/// with theta = -d*w/(n-1) substituted.
enum class Formulation { general, symmetrized };

inline std::string_view to_string(FormKind k) {
  switch (k) {
    case FormKind::cky: return "cky";
    case FormKind::ky: return "ky";
    case FormKind::star_ky: return "star-ky";
    case FormKind::parallel: return "parallel";
  }
  return "?";
}

inline FormKind parse_form_kind(std::string_view s) {
  if (s == "cky") return FormKind::cky;
  if (s == "ky") return FormKind::ky;
  if (s == "star-ky" || s == "star_ky" || s == "starky") return FormKind::star_ky;
  if (s == "parallel") return FormKind::parallel;
  throw InputError("unknown form kind '" + std::string(s) + "'");
}

namespace detail {

inline void check_cky_degree(const MetricLieAlgebra& alg, int degree) {
  if (degree < 1 || degree > alg.dim() - 1) {
    throw InputError("CKY systems need 1 <= p <= n-1");
  }
}

inline Eigen::MatrixXd stack_rows(const std::vector<Eigen::MatrixXd>& blocks) {
  Eigen::Index rows = 0;
  const Eigen::Index cols = blocks.empty() ? 0 : blocks.front().cols();
  for (const auto& b : blocks) rows += b.rows();
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace detail

/// Stacked scalar equations (rows) in the C(n,p) form coefficients (columns).
inline Eigen::MatrixXd assemble_cky_system(const MetricLieAlgebra& alg, int degree,
                                           Formulation formulation = Formulation::general) {
  detail::check_cky_degree(alg, degree);
  const int n = alg.dim();
  const int p = degree;
  const Connection conn = levi_civita(alg);
  const Eigen::MatrixXd dstar = codifferential_matrix(conn, p);

  if (formulation == Formulation::general) {
    const Eigen::MatrixXd d = exterior_derivative_matrix(alg, p);
    std::vector<Eigen::MatrixXd> blocks;
    for (int k = 0; k < n; ++k) {
      const Vec ek = alg.basis_vector(k);
      blocks.push_back(covariant_derivative_matrix(conn.nabla(k), p) -
                       interior_matrix(ek, p + 1) * d / (p + 1.0) +
                       wedge_covector_matrix(alg.gram().col(k), p - 1) * dstar / (n - p + 1.0));
    }
    return detail::stack_rows(blocks);
  }

  if (p != 2) throw InputError("the symmetrized formulation is only defined for 2-forms");
  const MultiIndexSet pairs(n, 2);
  std::vector<Eigen::MatrixXd> nabla_rows;
  for (int k = 0; k < n; ++k) nabla_rows.push_back(covariant_derivative_matrix(conn.nabla(k), 2));
  // theta(e_z) as a row over form coefficients.
  const Eigen::MatrixXd theta = -dstar / (n - 1.0);
  auto component = [&](int x, int y, int z) -> Eigen::RowVectorXd {
    // (nabla_x w)(e_y, e_z)
    if (y == z) return Eigen::RowVectorXd::Zero(pairs.size());
    const int lo = std::min(y, z);
    const int hi = std::max(y, z);
    const int pos = pairs.position(std::vector<int>{lo, hi});
    return (y < z ? 1.0 : -1.0) * nabla_rows[x].row(pos);
  };
  const Eigen::MatrixXd& g = alg.gram();
  std::vector<Eigen::RowVectorXd> rows;
  for (int x = 0; x < n; ++x) {
    for (int y = x; y < n; ++y) {
      for (int z = 0; z < n; ++z) {
        rows.push_back(component(x, y, z) + component(y, x, z) -
                       (2.0 * g(x, y) * theta.row(z) - g(y, z) * theta.row(x) - g(x, z) * theta.row(y)));
      }
    }
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), pairs.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = rows[r];
  return out;
}

/// Defining linear system of the given kind of p-forms.
inline Eigen::MatrixXd assemble_kind_system(const MetricLieAlgebra& alg, int degree, FormKind kind) {
  detail::check_cky_degree(alg, degree);
  switch (kind) {
    case FormKind::cky:
      return assemble_cky_system(alg, degree);
    case FormKind::ky:
      return detail::stack_rows(
          {assemble_cky_system(alg, degree), codifferential_matrix(levi_civita(alg), degree)});
    case FormKind::star_ky:
      return detail::stack_rows({assemble_cky_system(alg, degree), exterior_derivative_matrix(alg, degree)});
    case FormKind::parallel: {
      const Connection conn = levi_civita(alg);
      std::vector<Eigen::MatrixXd> blocks;
      for (int k = 0; k < alg.dim(); ++k) blocks.push_back(covariant_derivative_matrix(conn.nabla(k), degree));
      return detail::stack_rows(blocks);
    }
  }
  throw InputError("unknown form kind");
}

/// max |A eta| / max |eta| for the system of the given kind; 0 for eta = 0.
inline double kind_residual(const MetricLieAlgebra& alg, const PForm& eta, FormKind kind) {
  check_dim(alg, eta);
  const double scale = eta.max_abs();
  if (scale == 0.0) return 0.0;
  const Eigen::VectorXd r = assemble_kind_system(alg, eta.degree(), kind) * eta.coeffs();
  return (r.size() ? r.cwiseAbs().maxCoeff() : 0.0) / scale;
}

inline double cky_residual(const MetricLieAlgebra& alg, const PForm& eta) {
  return kind_residual(alg, eta, FormKind::cky);
}

struct SolutionSpace {
  int degree = 0;
  FormKind kind = FormKind::cky;
  /// Orthonormal in the form inner product, canonically ordered and signed.
  std::vector<PForm> basis;
  int system_rank = 0;
  double sv_gap = 0.0;

  int dimension() const { return static_cast<int>(basis.size()); }
};

/// Solves for the space of p-forms of the given kind.
///
/// The nullspace is computed in orthonormal-frame coordinates, where the form
/// inner product is Euclidean. The basis is then made canonical: the
/// lexicographically ordered unit forms are projected onto the space and
/// Gram-Schmidt orthonormalised in that order, and each element is signed so
/// that its first non-negligible coordinate coefficient is positive. The
/// result depends only on the subspace, not on SVD internals.
inline SolutionSpace solve_form_space(const MetricLieAlgebra& alg, int degree, FormKind kind) {
  const Eigen::MatrixXd system = assemble_kind_system(alg, degree, kind);
  const Eigen::MatrixXd to_frame = pullback_matrix(orthonormal_frame(alg.gram()), degree);
  const Eigen::MatrixXd from_frame = to_frame.inverse();
  const NullspaceResult ns = nullspace(system * from_frame, alg.tol().rank_rel);

  SolutionSpace out;
  out.degree = degree;
  out.kind = kind;
  out.system_rank = ns.rank;
  out.sv_gap = ns.sv_gap;

  const Eigen::Index m = ns.basis.rows();
  const Eigen::Index k = ns.basis.cols();
  std::vector<Eigen::VectorXd> chosen;
  for (Eigen::Index unit = 0; unit < m && static_cast<Eigen::Index>(chosen.size()) < k; ++unit) {
    Eigen::VectorXd r = ns.basis * ns.basis.row(unit).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& c : chosen) r -= c.dot(r) * c;
    }
    const double nr = r.norm();
    if (nr <= 1e-6) continue;
    chosen.push_back(r / nr);
  }
  for (const auto& u : chosen) {
    Eigen::VectorXd coeffs = from_frame * u;
    const double scale = coeffs.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
      if (std::abs(coeffs(i)) > 1e-9 * scale) {
        if (coeffs(i) < 0) coeffs = -coeffs;
        break;
      }
    }
    out.basis.emplace_back(alg.dim(), degree, std::move(coeffs));
  }
  return out;
}

/// Frame-coordinate orthonormal basis (columns) of a solution space.
inline Eigen::MatrixXd frame_basis(const MetricLieAlgebra& alg, const SolutionSpace& space) {
  const Eigen::Index size = binomial(alg.dim(), space.degree);
  Eigen::MatrixXd out(size, space.dimension());
  const Eigen::MatrixXd to_frame = pullback_matrix(orthonormal_frame(alg.gram()), space.degree);
  for (int i = 0; i < space.dimension(); ++i) out.col(i) = to_frame * space.basis[i].coeffs();
  return out;
}

/// |eta - proj(eta)| / |eta| in the form norm; 0 for eta = 0.
inline double projection_residual(const MetricLieAlgebra& alg, const SolutionSpace& space, const PForm& eta) {
  check_dim(alg, eta);
  if (eta.degree() != space.degree) throw InputError("form degree does not match solution space");
  const Eigen::MatrixXd to_frame = pullback_matrix(orthonormal_frame(alg.gram()), space.degree);
  const Eigen::VectorXd v = to_frame * eta.coeffs();
  const double nv = v.norm();
  if (nv == 0.0) return 0.0;
  const Eigen::MatrixXd b = frame_basis(alg, space);
  const Eigen::VectorXd r = v - b * (b.transpose() * v);
  return r.norm() / nv;
}

/// Sine of the largest principal angle between the two spaces (1 if their
/// dimensions differ).
inline double subspace_distance(const MetricLieAlgebra& alg, const SolutionSpace& a, const SolutionSpace& b) {
  if (a.dimension() != b.dimension() || a.degree != b.degree) return 1.0;
  if (a.dimension() == 0) return 0.0;
  const Eigen::MatrixXd ua = frame_basis(alg, a);
  const Eigen::MatrixXd ub = frame_basis(alg, b);
  const Eigen::MatrixXd r = ua - ub * (ub.transpose() * ua);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return svd.singularValues()(0);
}

/// Largest projection residual of the elements of `small` onto `big`.
inline double containment_residual(const MetricLieAlgebra& alg, const SolutionSpace& small, const SolutionSpace& big) {
  double worst = 0.0;
  for (const PForm& f : small.basis) worst = std::max(worst, projection_residual(alg, big, f));
  return worst;
}

struct CKYClassification {
  bool is_strict = false;
  PForm theta{1, 1};
  Vec xi;
  double xi_norm = 0.0;
  bool closed = false;
  bool coclosed = false;
  bool parallel = false;
  bool xi_in_center = false;
  bool xi_perp_center = false;
  double cky_residual = 0.0;
  /// |T xi| in the metric norm.
  double t_xi_residual = 0.0;
  /// Rank of T restricted and projected to xi-perp (only meaningful when strict).
  int restricted_rank = 0;
  /// |proj_{g'} xi| / |xi|; 0 when xi = 0.
  double derived_projection = 0.0;
};

/// theta = -d*w/(n-1), xi = theta^sharp, and the flags describing w.
inline CKYClassification extract_associated_vector(const MetricLieAlgebra& alg, const PForm& omega) {
  check_dim(alg, omega);
  if (omega.degree() != 2) throw InputError("expected a 2-form");
  const int n = alg.dim();
  const ToleranceConfig& tol = alg.tol();
  const Connection conn = levi_civita(alg);
  CKYClassification out;
  out.cky_residual = cky_residual(alg, omega);
  if (out.cky_residual > tol.residual) {
    throw PreconditionError("form is not conformal Killing-Yano (residual " + std::to_string(out.cky_residual) + ")");
  }
  const double scale = std::max(1.0, form_norm(alg, omega));
  const double coeff_scale = std::max(1.0, omega.max_abs());
  out.theta = (-1.0 / (n - 1.0)) * codifferential(conn, omega);
  out.xi = sharp(alg, out.theta);
  out.xi_norm = std::sqrt(std::max(0.0, alg.inner(out.xi, out.xi)));
  out.is_strict = form_norm(alg, out.theta) > tol.residual * scale;

  out.closed = exterior_derivative(alg, omega).max_abs() <= tol.residual * coeff_scale;
  out.coclosed = !out.is_strict;
  double nabla_max = 0.0;
  for (int k = 0; k < n; ++k) {
    nabla_max = std::max(nabla_max, covariant_derivative(conn, alg.basis_vector(k), omega).max_abs());
  }
  out.parallel = nabla_max <= tol.residual * coeff_scale;

  const Eigen::MatrixXd z = g_orthonormalize(center(alg), alg.gram(), tol.rank_rel);
  const Vec pz = g_project(out.xi, z, alg.gram());
  const double xscale = std::max(1.0, out.xi_norm);
  out.xi_perp_center = std::sqrt(std::max(0.0, alg.inner(pz, pz))) <= tol.residual * xscale;
  const Vec off = out.xi - pz;
  out.xi_in_center = std::sqrt(std::max(0.0, alg.inner(off, off))) <= tol.residual * xscale;

  const Endo t = to_endomorphism(alg, omega);
  const Vec txi = t * out.xi;
  out.t_xi_residual = std::sqrt(std::max(0.0, alg.inner(txi, txi)));

  if (out.xi_norm > 0.0) {
    const Eigen::MatrixXd derived = g_orthonormalize(derived_algebra(alg), alg.gram(), tol.rank_rel);
    const Vec pd = g_project(out.xi, derived, alg.gram());
    out.derived_projection = std::sqrt(std::max(0.0, alg.inner(pd, pd))) / out.xi_norm;

    Eigen::MatrixXd xi_col = out.xi;
    const Eigen::MatrixXd perp = g_orthogonal_complement(xi_col, alg.gram(), tol.rank_rel);
    const Eigen::MatrixXd restricted = perp.transpose() * alg.gram() * t * perp;
    out.restricted_rank = numerical_rank(restricted, 1e-8);
  } else {
    out.restricted_rank = numerical_rank(t, 1e-8);
  }
  return out;
}

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  double max_residual = 0.0;
  bool passed = false;
};

/// Evaluates the structural identities that a skew T with unit associated
/// vector xi perpendicular to a center of dimension >= 2 satisfies exactly
/// when it is a strict CKY tensor. Each identity is multilinear, so it is
/// checked on G-orthonormal bases of the center z, of z-perp, and of
/// z-perp intersected with xi-perp.
inline IdentityReport structural_identity_report(const MetricLieAlgebra& alg, const Endo& t, const Vec& xi) {
  const int n = alg.dim();
  if (t.rows() != n || t.cols() != n || xi.size() != n) throw InputError("shape mismatch");
  const ToleranceConfig& tol = alg.tol();
  const Eigen::MatrixXd& g = alg.gram();
  const Eigen::MatrixXd zb = g_orthonormalize(center(alg), g, tol.rank_rel);
  if (zb.cols() < 2) throw PreconditionError("structural identities need a center of dimension >= 2");
  const Eigen::MatrixXd zperp = g_orthogonal_complement(zb, g, tol.rank_rel);
  Eigen::MatrixXd z_and_xi(n, zb.cols() + 1);
  z_and_xi << zb, xi;
  const Eigen::MatrixXd w = g_orthogonal_complement(g_orthonormalize(z_and_xi, g, tol.rank_rel), g, tol.rank_rel);
  const Connection conn = levi_civita(alg);

  auto ip = [&](const Vec& a, const Vec& b) { return a.dot(g * b); };
  auto br = [&](const Vec& a, const Vec& b) { return alg.bracket(a, b); };
  auto theta = [&](const Vec& x) { return ip(xi, x); };

  IdentityReport report;
  auto record = [&](const std::string& name, double value) {
    for (auto& c : report.checks) {
      if (c.name == name) {
        c.residual = std::max(c.residual, std::abs(value));
        return;
      }
    }
    report.checks.push_back({name, std::abs(value)});
  };
  for (const char* name : {"center_pairing", "center_pairing_swapped", "mixed_center_a", "mixed_center_b",
                           "xi_plane_a", "xi_plane_b", "xi_xi", "killing_yano_part",
                           "orthogonal_center_pairs", "center_norm", "t_xi", "xi_unit", "xi_perp_center",
                           "t_skew"}) {
    record(name, 0.0);
  }

  for (Eigen::Index a = 0; a < zb.cols(); ++a) {
    for (Eigen::Index b = 0; b < zb.cols(); ++b) {
      const Vec z1 = zb.col(a);
      const Vec z2 = zb.col(b);
      for (Eigen::Index i = 0; i < zperp.cols(); ++i) {
        const Vec x = zperp.col(i);
        record("center_pairing", ip(br(x, t * z1), z2) - 2.0 * ip(z1, z2) * theta(x));
        record("center_pairing_swapped", ip(br(x, t * z2), z1) - 2.0 * ip(z1, z2) * theta(x));
        if (a != b) record("orthogonal_center_pairs", ip(br(t * z1, x), z2));
        if (a == b) record("center_norm", ip(br(t * z1, x), z1) + 2.0 * ip(z1, z1) * theta(x));
      }
    }
  }
  for (Eigen::Index a = 0; a < zb.cols(); ++a) {
    const Vec z = zb.col(a);
    for (Eigen::Index i = 0; i < zperp.cols(); ++i) {
      for (Eigen::Index j = 0; j < zperp.cols(); ++j) {
        const Vec x = zperp.col(i);
        const Vec y = zperp.col(j);
        record("mixed_center_a", ip(br(x, t * y), z) + 2.0 * ip(br(t * z, x), y) + 2.0 * ip(br(t * z, y), x) +
                                     ip(br(y, t * x), z));
        record("mixed_center_b", -ip(br(t * z, x), y) - ip(br(t * z, y), x) + ip(br(y, x), t * z) +
                                     2.0 * ip(br(t * y, x), z) - ip(br(t * x, y), z));
      }
    }
  }
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    const Vec x = w.col(i);
    record("xi_xi", ip(br(xi, t * x), xi));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const Vec y = w.col(j);
      record("xi_plane_a", ip(br(xi, t * x), y) - ip(br(t * x, y), xi) + ip(br(y, xi), t * x) +
                               2.0 * ip(br(t * y, xi), x) + 2.0 * ip(br(t * y, x), xi) + 2.0 * ip(x, y));
      record("xi_plane_b", ip(br(x, t * y), xi) - ip(br(t * y, xi), x) + ip(br(xi, x), t * y) +
                               ip(br(y, t * x), xi) - ip(br(t * x, xi), y) + ip(br(xi, y), t * x) -
                               4.0 * ip(x, y));
      const Endo dx = covariant_derivative(conn, x, t);
      const Endo dy = covariant_derivative(conn, y, t);
      for (Eigen::Index k = 0; k < w.cols(); ++k) {
        const Vec z = w.col(k);
        record("killing_yano_part", ip(dx * y, z) + ip(dy * x, z));
      }
    }
  }
  const Vec txi = t * xi;
  record("t_xi", std::sqrt(std::max(0.0, ip(txi, txi))));
  record("xi_unit", std::sqrt(std::max(0.0, ip(xi, xi))) - 1.0);
  const Vec pz = g_project(xi, zb, g);
  record("xi_perp_center", std::sqrt(std::max(0.0, ip(pz, pz))));
  const Eigen::MatrixXd gt = g * t;
  record("t_skew", max_abs(gt + gt.transpose()));

  for (const auto& c : report.checks) report.max_residual = std::max(report.max_residual, c.residual);
  report.passed = report.max_residual <= tol.residual;
  return report;
}

}  // namespace ckylab
