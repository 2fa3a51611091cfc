#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <span>
#include <vector>

#include "connection.hpp"
#include "errors.hpp"
#include "liealg.hpp"
#include "linalg.hpp"
#include "multi_index.hpp"

namespace ckylab {

/// Left-invariant p-form. coeffs(pos) is the value of the form on the basis
/// vectors e_{i_1}, ..., e_{i_p} for the pos-th increasing multi-index.
class PForm {
 public:
  PForm(int dim, int degree) : dim_(dim), degree_(degree) {
    if (degree < 0 || degree > dim) throw InputError("form degree out of range");
    coeffs_ = Eigen::VectorXd::Zero(binomial(dim, degree));
  }

  PForm(int dim, int degree, Eigen::VectorXd coeffs) : PForm(dim, degree) {
    if (coeffs.size() != coeffs_.size()) throw InputError("coefficient count does not match C(n,p)");
    coeffs_ = std::move(coeffs);
  }

  /// e^{i_1} ^ ... ^ e^{i_p} scaled by `value`; indices may come in any order.
  static PForm monomial(int dim, std::vector<int> indices, double value = 1.0) {
    PForm f(dim, static_cast<int>(indices.size()));
    const int sign = sort_with_sign(indices);
    if (sign == 0) return f;
    const int pos = MultiIndexSet(dim, f.degree()).position(indices);
    if (pos < 0) throw InputError("basis index out of range");
    f.coeffs_(pos) = sign * value;
    return f;
  }

  static PForm covector(const Vec& components) {
    return PForm(static_cast<int>(components.size()), 1, components);
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  /// Value on basis vectors given by indices in any order (antisymmetric extension).
  double on_basis(std::vector<int> indices) const {
    if (static_cast<int>(indices.size()) != degree_) throw InputError("wrong number of arguments for form");
    const int sign = sort_with_sign(indices);
    if (sign == 0) return 0.0;
    const int pos = MultiIndexSet(dim_, degree_).position(indices);
    if (pos < 0) throw InputError("basis index out of range");
    return sign * coeffs_(pos);
  }

  /// Multilinear evaluation on arbitrary vectors (columns of `vectors`).
  double evaluate(const Eigen::MatrixXd& vectors) const {
    if (vectors.rows() != dim_ || vectors.cols() != degree_) throw InputError("argument shape mismatch");
    if (degree_ == 0) return coeffs_(0);
    const MultiIndexSet set(dim_, degree_);
    double total = 0.0;
    Eigen::MatrixXd minor(degree_, degree_);
    for (int pos = 0; pos < set.size(); ++pos) {
      if (coeffs_(pos) == 0.0) continue;
      for (int r = 0; r < degree_; ++r) minor.row(r) = vectors.row(set[pos][r]);
      total += coeffs_(pos) * minor.determinant();
    }
    return total;
  }

  double max_abs() const { return coeffs_.size() ? coeffs_.cwiseAbs().maxCoeff() : 0.0; }

  PForm& operator+=(const PForm& o) {
    check_same(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  PForm& operator-=(const PForm& o) {
    check_same(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  PForm& operator*=(double s) {
    coeffs_ *= s;
    return *this;
  }
  friend PForm operator+(PForm a, const PForm& b) { return a += b; }
  friend PForm operator-(PForm a, const PForm& b) { return a -= b; }
  friend PForm operator*(double s, PForm a) { return a *= s; }
  friend PForm operator*(PForm a, double s) { return a *= s; }

 private:
  void check_same(const PForm& o) const {
    if (o.dim_ != dim_ || o.degree_ != degree_) throw InputError("form shape mismatch");
  }

  int dim_;
  int degree_;
  Eigen::VectorXd coeffs_;
};

namespace detail {

// Column index and sign of the form coefficient addressed by an unsorted tuple.
struct SignedSlot {
  int pos = -1;
  int sign = 0;
};

inline SignedSlot locate(const MultiIndexSet& set, std::vector<int> tuple) {
  const int sign = sort_with_sign(tuple);
  if (sign == 0) return {};
  return {set.position(tuple), sign};
}

}  // namespace detail

// Linear operators on coefficient vectors. Rows index the target degree's
// multi-indices, columns the source degree's.

/// (M^* eta)(e_I) = eta(M e_{i_1}, ..., M e_{i_p}).
inline Eigen::MatrixXd pullback_matrix(const Eigen::MatrixXd& m, int degree) {
  const int n = static_cast<int>(m.rows());
  const MultiIndexSet set(n, degree);
  Eigen::MatrixXd out(set.size(), set.size());
  if (degree == 0) {
    out(0, 0) = 1.0;
    return out;
  }
  Eigen::MatrixXd minor(degree, degree);
  for (int r = 0; r < set.size(); ++r) {
    for (int c = 0; c < set.size(); ++c) {
      for (int a = 0; a < degree; ++a) {
        for (int b = 0; b < degree; ++b) minor(a, b) = m(set[c][a], set[r][b]);
      }
      out(r, c) = minor.determinant();
    }
  }
  return out;
}

/// Chevalley-Eilenberg differential on p-forms:
/// d eta(x_0..x_p) = sum_{a<b} (-1)^{a+b} eta([x_a, x_b], x_0..^a..^b..x_p).
inline Eigen::MatrixXd exterior_derivative_matrix(const MetricLieAlgebra& alg, int degree) {
  const int n = alg.dim();
  if (degree < 0 || degree >= n) throw InputError("exterior derivative needs degree in [0, n-1]");
  const MultiIndexSet src(n, degree);
  const MultiIndexSet dst(n, degree + 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dst.size(), src.size());
  for (int r = 0; r < dst.size(); ++r) {
    const std::vector<int>& j = dst[r];
    for (int a = 0; a <= degree; ++a) {
      for (int b = a + 1; b <= degree; ++b) {
        const double sgn = ((a + b) % 2 == 0) ? 1.0 : -1.0;
        std::vector<int> rest;
        for (int t = 0; t <= degree; ++t) {
          if (t != a && t != b) rest.push_back(j[t]);
        }
        for (int k = 0; k < n; ++k) {
          const double coef = alg.c(j[a], j[b], k);
          if (coef == 0.0) continue;
          std::vector<int> tuple{k};
          tuple.insert(tuple.end(), rest.begin(), rest.end());
          const auto slot = detail::locate(src, tuple);
          if (slot.sign != 0) out(r, slot.pos) += sgn * coef * slot.sign;
        }
      }
    }
  }
  return out;
}

/// (nabla_x eta)(v_1..v_p) = -sum_s eta(v_1, .., nabla_x v_s, .., v_p), with
/// `nabla_x` the endomorphism matrix of nabla_x.
inline Eigen::MatrixXd covariant_derivative_matrix(const Endo& nabla_x, int degree) {
  const int n = static_cast<int>(nabla_x.rows());
  const MultiIndexSet set(n, degree);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(set.size(), set.size());
  for (int r = 0; r < set.size(); ++r) {
    const std::vector<int>& idx = set[r];
    for (int s = 0; s < degree; ++s) {
      for (int m = 0; m < n; ++m) {
        const double coef = nabla_x(m, idx[s]);
        if (coef == 0.0) continue;
        std::vector<int> tuple = idx;
        tuple[s] = m;
        const auto slot = detail::locate(set, tuple);
        if (slot.sign != 0) out(r, slot.pos) -= coef * slot.sign;
      }
    }
  }
  return out;
}

/// Interior product iota_x from p-forms to (p-1)-forms.
inline Eigen::MatrixXd interior_matrix(const Vec& x, int degree) {
  const int n = static_cast<int>(x.size());
  if (degree < 1 || degree > n) throw InputError("interior product needs degree in [1, n]");
  const MultiIndexSet src(n, degree);
  const MultiIndexSet dst(n, degree - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dst.size(), src.size());
  for (int r = 0; r < dst.size(); ++r) {
    for (int m = 0; m < n; ++m) {
      if (x(m) == 0.0) continue;
      std::vector<int> tuple{m};
      tuple.insert(tuple.end(), dst[r].begin(), dst[r].end());
      const auto slot = detail::locate(src, tuple);
      if (slot.sign != 0) out(r, slot.pos) += x(m) * slot.sign;
    }
  }
  return out;
}

/// eta -> theta ^ eta for a fixed covector theta, from p-forms to (p+1)-forms.
inline Eigen::MatrixXd wedge_covector_matrix(const Vec& theta, int degree) {
  const int n = static_cast<int>(theta.size());
  if (degree < 0 || degree >= n) throw InputError("wedge target degree exceeds dimension");
  const MultiIndexSet src(n, degree);
  const MultiIndexSet dst(n, degree + 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dst.size(), src.size());
  for (int r = 0; r < dst.size(); ++r) {
    const std::vector<int>& j = dst[r];
    for (int a = 0; a <= degree; ++a) {
      if (theta(j[a]) == 0.0) continue;
      std::vector<int> rest;
      for (int t = 0; t <= degree; ++t) {
        if (t != a) rest.push_back(j[t]);
      }
      out(r, src.position(rest)) += ((a % 2 == 0) ? 1.0 : -1.0) * theta(j[a]);
    }
  }
  return out;
}

/// Gram matrix of the induced inner product on p-form coefficients, normalised
/// so that e^{i_1}^...^e^{i_p} has unit norm for an orthonormal basis.
inline Eigen::MatrixXd form_metric_matrix(const MetricLieAlgebra& alg, int degree) {
  const Eigen::MatrixXd to_frame = pullback_matrix(orthonormal_frame(alg.gram()), degree);
  return to_frame.transpose() * to_frame;
}

/// Hodge star for the orientation of the ordered coordinate basis.
inline Eigen::MatrixXd hodge_matrix(const MetricLieAlgebra& alg, int degree) {
  const int n = alg.dim();
  if (degree < 0 || degree > n) throw InputError("form degree out of range");
  const Eigen::MatrixXd frame = orthonormal_frame(alg.gram());
  const MultiIndexSet src(n, degree);
  const MultiIndexSet dst(n, n - degree);
  Eigen::MatrixXd star = Eigen::MatrixXd::Zero(dst.size(), src.size());
  for (int c = 0; c < src.size(); ++c) {
    const std::vector<int> rest = complement(src[c], n);
    std::vector<int> perm = src[c];
    perm.insert(perm.end(), rest.begin(), rest.end());
    star(dst.position(rest), c) = sort_with_sign(perm);
  }
  return pullback_matrix(frame.inverse(), n - degree) * star * pullback_matrix(frame, degree);
}

/// d* eta = -sum_a iota_{E_a} nabla_{E_a} eta over a G-orthonormal frame {E_a}.
inline Eigen::MatrixXd codifferential_matrix(const Connection& conn, int degree) {
  const int n = conn.dim();
  if (degree < 1 || degree > n) throw InputError("codifferential needs degree in [1, n]");
  const Eigen::MatrixXd frame = orthonormal_frame(conn.algebra().gram());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(binomial(n, degree - 1), binomial(n, degree));
  for (int a = 0; a < n; ++a) {
    const Vec e = frame.col(a);
    out -= interior_matrix(e, degree) * covariant_derivative_matrix(conn.along(e), degree);
  }
  return out;
}

/// d* = (-1)^{n(p+1)+1} * d * on p-forms; an independent route to the codifferential.
inline Eigen::MatrixXd codifferential_hodge_matrix(const MetricLieAlgebra& alg, int degree) {
  const int n = alg.dim();
  if (degree < 1 || degree > n) throw InputError("codifferential needs degree in [1, n]");
  const double sign = ((n * (degree + 1) + 1) % 2 == 0) ? 1.0 : -1.0;
  return sign * hodge_matrix(alg, n - degree + 1) * exterior_derivative_matrix(alg, n - degree) *
         hodge_matrix(alg, degree);
}

// Form-level operations.

inline void check_dim(const MetricLieAlgebra& alg, const PForm& f) {
  if (f.dim() != alg.dim()) throw InputError("form dimension does not match algebra dimension");
}

/// alpha ^ beta; a degree overflow yields the zero form of degree n.
inline PForm wedge(const PForm& alpha, const PForm& beta) {
  if (alpha.dim() != beta.dim()) throw InputError("form dimension mismatch");
  const int n = alpha.dim();
  const int p = alpha.degree();
  const int q = beta.degree();
  if (p + q > n) return PForm(n, n);
  const MultiIndexSet dst(n, p + q);
  const MultiIndexSet split(p + q, p);
  PForm out(n, p + q);
  for (int r = 0; r < dst.size(); ++r) {
    const std::vector<int>& k = dst[r];
    double total = 0.0;
    for (int s = 0; s < split.size(); ++s) {
      const std::vector<int>& pick = split[s];
      std::vector<int> first;
      std::vector<int> second;
      std::vector<int> order = pick;
      const std::vector<int> others = complement(pick, p + q);
      order.insert(order.end(), others.begin(), others.end());
      for (int t : pick) first.push_back(k[t]);
      for (int t : others) second.push_back(k[t]);
      total += sort_with_sign(order) * alpha.on_basis(first) * beta.on_basis(second);
    }
    out.coeffs()(r) = total;
  }
  return out;
}

inline PForm interior(const Vec& x, const PForm& eta) {
  if (x.size() != eta.dim()) throw InputError("vector length does not match form dimension");
  if (eta.degree() == 0) return PForm(eta.dim(), 0);
  return PForm(eta.dim(), eta.degree() - 1, interior_matrix(x, eta.degree()) * eta.coeffs());
}

/// x -> <x, .>
inline PForm flat(const MetricLieAlgebra& alg, const Vec& x) { return PForm::covector(alg.gram() * x); }

/// theta -> the vector xi with theta = <xi, .>
inline Vec sharp(const MetricLieAlgebra& alg, const PForm& theta) {
  check_dim(alg, theta);
  if (theta.degree() != 1) throw InputError("sharp expects a 1-form");
  return alg.gram_inverse() * theta.coeffs();
}

inline PForm exterior_derivative(const MetricLieAlgebra& alg, const PForm& eta) {
  check_dim(alg, eta);
  if (eta.degree() >= alg.dim()) return PForm(alg.dim(), alg.dim());
  return PForm(alg.dim(), eta.degree() + 1, exterior_derivative_matrix(alg, eta.degree()) * eta.coeffs());
}

inline PForm covariant_derivative(const Connection& conn, const Vec& x, const PForm& eta) {
  return PForm(eta.dim(), eta.degree(), covariant_derivative_matrix(conn.along(x), eta.degree()) * eta.coeffs());
}

inline PForm codifferential(const Connection& conn, const PForm& eta) {
  check_dim(conn.algebra(), eta);
  if (eta.degree() == 0) throw InputError("codifferential needs degree >= 1");
  return PForm(eta.dim(), eta.degree() - 1, codifferential_matrix(conn, eta.degree()) * eta.coeffs());
}

inline PForm codifferential(const MetricLieAlgebra& alg, const PForm& eta) {
  return codifferential(levi_civita(alg), eta);
}

inline PForm codifferential_via_hodge(const MetricLieAlgebra& alg, const PForm& eta) {
  check_dim(alg, eta);
  if (eta.degree() == 0) throw InputError("codifferential needs degree >= 1");
  return PForm(eta.dim(), eta.degree() - 1, codifferential_hodge_matrix(alg, eta.degree()) * eta.coeffs());
}

inline PForm hodge_star(const MetricLieAlgebra& alg, const PForm& eta) {
  check_dim(alg, eta);
  return PForm(alg.dim(), alg.dim() - eta.degree(), hodge_matrix(alg, eta.degree()) * eta.coeffs());
}

/// Volume form sqrt(det G) e^1 ^ ... ^ e^n.
inline PForm volume_form(const MetricLieAlgebra& alg) {
  return hodge_star(alg, PForm(alg.dim(), 0, Eigen::VectorXd::Ones(1)));
}

inline double inner_product(const MetricLieAlgebra& alg, const PForm& a, const PForm& b) {
  check_dim(alg, a);
  check_dim(alg, b);
  if (a.degree() != b.degree()) throw InputError("inner product of forms of different degree");
  return a.coeffs().dot(form_metric_matrix(alg, a.degree()) * b.coeffs());
}

inline double form_norm(const MetricLieAlgebra& alg, const PForm& a) {
  return std::sqrt(std::max(0.0, inner_product(alg, a, a)));
}

/// Skew endomorphism T with omega(x, y) = <T x, y>.
inline Endo to_endomorphism(const MetricLieAlgebra& alg, const PForm& omega) {
  check_dim(alg, omega);
  if (omega.degree() != 2) throw InputError("expected a 2-form");
  const int n = alg.dim();
  Eigen::MatrixXd w(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) w(i, j) = omega.on_basis({i, j});
  }
  return -alg.gram_inverse() * w;
}

inline PForm from_endomorphism(const MetricLieAlgebra& alg, const Endo& t) {
  const int n = alg.dim();
  if (t.rows() != n || t.cols() != n) throw InputError("endomorphism shape mismatch");
  const Eigen::MatrixXd w = t.transpose() * alg.gram();
  const MultiIndexSet set(n, 2);
  PForm out(n, 2);
  for (int pos = 0; pos < set.size(); ++pos) {
    const int i = set[pos][0];
    const int j = set[pos][1];
    out.coeffs()(pos) = 0.5 * (w(i, j) - w(j, i));
  }
  return out;
}

}  // namespace ckylab
