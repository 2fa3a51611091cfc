#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cky.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "forms.hpp"
#include "liealg.hpp"
#include "multi_index.hpp"

namespace ckylab {

template <typename Scalar>
using ParamMap = std::map<std::string, Scalar>;

struct FamilyInfo {
  std::string id;
  std::vector<std::string> params;
  std::string constraints;
  std::string source;
};

/// Static description of every catalogued family, sorted by id.
inline const std::vector<FamilyInfo>& family_table() {
  static const std::vector<FamilyInfo> table = {
      {"L59", {"r"}, "r > 0", "center-dim-2 normal form, nilpotent regime r = s"},
      {"abelian", {"n"}, "n >= 1 (default 5)", "flat reference"},
      {"dim3center", {"a1", "a2", "a3", "a4", "a5"}, "not all a_i zero", "center of dimension 3, no strict CKY"},
      {"g2", {"t", "a1", "a2"}, "t, a1, a2 > 0", "xi-central classification, R^2 x aff(R) extension"},
      {"g3", {"t", "a1", "a2"}, "t, a1, a2 > 0", "xi-central classification, R x e(2) extension"},
      {"g4", {"t", "s", "a1", "a2"}, "t > 0, 0 < s <= 1, a1, a2 > 0, a1 >= a2 if s = 1",
       "xi-central classification, aff(R) x aff(R) extension"},
      {"g5", {"t", "c"}, "t, c > 0", "xi-central classification, d_{4,1/2} extension"},
      {"g6", {"t", "c"}, "t, c > 0", "xi-central classification, d_{4,2} extension"},
      {"g7_delta", {"t", "c", "delta"}, "t, delta > 0, c != 0", "xi-central classification, d'_{4,delta/2} extension"},
      {"g8_lambda", {"t", "a1", "a2", "lambda"}, "t, a1, a2, lambda > 0",
       "xi-central classification, r'_{4,lambda,0} extension"},
      {"grs", {"r", "s"}, "r, s > 0", "center-dim-2 normal form g_{r,s}"},
      {"h5", {"a1", "a2"}, "a1, a2 > 0", "xi-central classification, Heisenberg extension"},
      {"sl2xR2", {"r", "s"}, "r > s > 0", "center-dim-2 normal form, R^2 x sl(2,R) regime"},
      {"su2xR2", {"r", "s"}, "s > r > 0", "center-dim-2 normal form, R^2 x su(2) regime"},
  };
  return table;
}

inline const FamilyInfo& family_info(const std::string& id) {
  for (const auto& f : family_table()) {
    if (f.id == id) return f;
  }
  throw InputError("unknown family '" + id + "'");
}

/// The eight families of the xi-central classification.
inline const std::vector<std::string>& extension_family_ids() {
  static const std::vector<std::string> ids = {"g3", "g2", "g8_lambda", "g4", "g5", "g6", "g7_delta", "h5"};
  return ids;
}

namespace detail {

template <typename Scalar>
Scalar param_or(const ParamMap<Scalar>& params, const std::string& name, const Scalar& fallback) {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

template <typename Scalar>
void check_param_names(const std::string& id, const ParamMap<Scalar>& params) {
  const auto& allowed = family_info(id).params;
  for (const auto& [name, value] : params) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
      throw InputError("family " + id + " has no parameter '" + name + "'");
    }
  }
}

inline void require(bool ok, const std::string& id, const std::string& what) {
  if (!ok) throw InputError("constraint violated for " + id + ": " + what);
}

inline double to_double(double v) { return v; }
inline double to_double(const exact::Rational& v) { return static_cast<double>(v); }

}  // namespace detail

/// Parameters with defaults filled in; throws on unknown names or violated constraints.
template <typename Scalar>
ParamMap<Scalar> resolve_params(const std::string& id, const ParamMap<Scalar>& given) {
  detail::check_param_names(id, given);
  ParamMap<Scalar> p;
  const Scalar one(1);
  const Scalar zero(0);
  auto get = [&](const char* name, const Scalar& fallback) {
    p[name] = detail::param_or(given, std::string(name), fallback);
    return p[name];
  };
  using detail::require;
  if (id == "g3" || id == "g2") {
    const Scalar t = get("t", one), a1 = get("a1", one), a2 = get("a2", one);
    require(t > zero && a1 > zero && a2 > zero, id, "t, a1, a2 > 0");
  } else if (id == "g8_lambda") {
    const Scalar t = get("t", one), a1 = get("a1", one), a2 = get("a2", one), l = get("lambda", one);
    require(t > zero && a1 > zero && a2 > zero && l > zero, id, "t, a1, a2, lambda > 0");
  } else if (id == "g4") {
    const Scalar t = get("t", one), s = get("s", one), a1 = get("a1", one), a2 = get("a2", one);
    require(t > zero && a1 > zero && a2 > zero, id, "t, a1, a2 > 0");
    require(s > zero && s <= one, id, "0 < s <= 1");
    require(s < one || a1 >= a2, id, "a1 >= a2 when s = 1");
  } else if (id == "g5" || id == "g6") {
    const Scalar t = get("t", one), c = get("c", one);
    require(t > zero && c > zero, id, "t, c > 0");
  } else if (id == "g7_delta") {
    const Scalar t = get("t", one), c = get("c", one), d = get("delta", one);
    require(t > zero && d > zero, id, "t, delta > 0");
    require(c != zero, id, "c != 0");
  } else if (id == "h5") {
    const Scalar a1 = get("a1", one), a2 = get("a2", one);
    require(a1 > zero && a2 > zero, id, "a1, a2 > 0");
  } else if (id == "grs") {
    const Scalar r = get("r", one), s = get("s", Scalar(2));
    require(r > zero && s > zero, id, "r, s > 0");
  } else if (id == "L59") {
    require(get("r", one) > zero, id, "r > 0");
  } else if (id == "su2xR2") {
    const Scalar r = get("r", one), s = get("s", Scalar(2));
    require(s > r && r > zero, id, "s > r > 0");
  } else if (id == "sl2xR2") {
    const Scalar r = get("r", Scalar(2)), s = get("s", one);
    require(r > s && s > zero, id, "r > s > 0");
  } else if (id == "dim3center") {
    bool nonzero = false;
    const Scalar defaults[5] = {zero, zero, Scalar(2), one, one};
    for (int i = 0; i < 5; ++i) {
      nonzero |= get(("a" + std::to_string(i + 1)).c_str(), defaults[i]) != zero;
    }
    require(nonzero, id, "the bracket [x, xi] must be nonzero");
  } else if (id == "abelian") {
    const Scalar n = get("n", Scalar(5));
    const double nd = detail::to_double(n);
    require(nd >= 1.0 && nd <= 10.0 && std::floor(nd) == nd, id, "n is an integer in [1, 10]");
  } else {
    throw InputError("unknown family '" + id + "'");
  }
  return p;
}

/// Structure constants, Gram matrix and (where one exists) the reference
/// strict CKY 2-form coefficients, as rational functions of the parameters.
template <typename Scalar>
struct FamilyData {
  StructureData<Scalar> structure;
  std::optional<std::vector<Scalar>> form;
};

template <typename Scalar>
FamilyData<Scalar> family_structure(const std::string& id, const ParamMap<Scalar>& given) {
  const ParamMap<Scalar> p = resolve_params(id, given);
  auto v = [&](const char* name) { return p.at(name); };
  const Scalar one(1), two(2), four(4), half = Scalar(1) / Scalar(2);
  using Terms = std::vector<std::pair<int, Scalar>>;

  auto make_form = [](int n, const std::vector<std::pair<std::pair<int, int>, Scalar>>& terms) {
    const MultiIndexSet pairs(n, 2);
    std::vector<Scalar> coeffs(pairs.size(), Scalar(0));
    for (const auto& [ij, value] : terms) {
      coeffs[pairs.position(std::vector<int>{ij.first, ij.second})] = value;
    }
    return coeffs;
  };
  auto diag = [](StructureData<Scalar>& s, const std::vector<Scalar>& d) {
    for (int i = 0; i < static_cast<int>(d.size()); ++i) s.set_metric_entry(i, i, d[i]);
  };
  const std::vector<std::string> e_labels = {"E1", "E2", "E3", "E4", "E5"};

  FamilyData<Scalar> out;
  if (id == "g3") {
    const Scalar t = v("t"), a1 = v("a1"), a2 = v("a2");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 1, Terms{{2, -one}});
    s.set_bracket(0, 2, Terms{{1, one}});
    s.set_bracket(0, 3, Terms{{4, -one}});
    s.set_bracket(1, 2, Terms{{4, -one}});
    diag(s, {t, t, t, a1 * a1 * t / (a2 * a2), four * t * t / (a2 * a2)});
    out.structure = s;
    out.form = make_form(5, {{{0, 3}, a1 * a1 * t / a2}, {{1, 2}, a2 * t}});
  } else if (id == "g2") {
    const Scalar t = v("t"), a1 = v("a1"), a2 = v("a2");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 1, Terms{{1, one}, {4, -one}});
    s.set_bracket(2, 3, Terms{{4, -one}});
    diag(s, {t, t, a1 * a1 * t, t / (a2 * a2), four * t * t / (a2 * a2)});
    out.structure = s;
    out.form = make_form(5, {{{0, 1}, t * a2}, {{2, 3}, t * a1 * a1 / a2}});
  } else if (id == "g8_lambda") {
    const Scalar t = v("t"), a1 = v("a1"), a2 = v("a2"), l = v("lambda");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 3, Terms{{0, -one}, {4, -one}});
    s.set_bracket(1, 2, Terms{{4, -one}});
    s.set_bracket(1, 3, Terms{{2, one / l}});
    s.set_bracket(2, 3, Terms{{1, -one / l}});
    const Scalar k = a1 * l / a2;
    diag(s, {k * k * t, t, t, t / (l * l), four * t * t / (a2 * a2)});
    out.structure = s;
    out.form = make_form(5, {{{0, 3}, -a1 * a1 * t / a2}, {{1, 2}, -a2 * t}});
  } else if (id == "g4") {
    const Scalar t = v("t"), sp = v("s"), a1 = v("a1"), a2 = v("a2");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 1, Terms{{1, one}, {4, -one}});
    s.set_bracket(2, 3, Terms{{3, one}, {4, -one}});
    diag(s, {t, t * a1 * a1, t * sp, t * a2 * a2 / sp, four * t * t});
    out.structure = s;
    out.form = make_form(5, {{{0, 1}, t * a1 * a1}, {{2, 3}, t * a2 * a2}});
  } else if (id == "g5") {
    const Scalar t = v("t"), c = v("c");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 1, Terms{{2, one}, {4, -one}});
    s.set_bracket(0, 3, Terms{{0, -half}});
    s.set_bracket(1, 3, Terms{{1, -half}});
    s.set_bracket(2, 3, Terms{{2, -one}, {4, one}});
    diag(s, {t, t, t, t, four * t * t / (c * c)});
    out.structure = s;
    out.form = make_form(5, {{{0, 1}, t * c}, {{2, 3}, -t * c}});
  } else if (id == "g6") {
    const Scalar t = v("t"), c = v("c");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 1, Terms{{2, one}});
    s.set_bracket(0, 3, Terms{{0, -two}});
    s.set_bracket(1, 2, Terms{{4, -one}});
    s.set_bracket(1, 3, Terms{{1, one}});
    s.set_bracket(2, 3, Terms{{2, -one}});
    const Scalar q = four * t * t / (c * c);
    diag(s, {t + q, t, t, four * t, q});
    s.set_metric_entry(0, 4, q);
    out.structure = s;
    out.form = make_form(5, {{{0, 3}, two * t * c}, {{1, 2}, t * c}});
  } else if (id == "g7_delta") {
    const Scalar t = v("t"), c = v("c"), d = v("delta");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 1, Terms{{2, one}, {4, -one}});
    s.set_bracket(0, 3, Terms{{0, -d / two}, {1, one}});
    s.set_bracket(1, 3, Terms{{0, -one}, {1, -d / two}});
    s.set_bracket(2, 3, Terms{{2, -d}, {4, d}});
    diag(s, {t, t, t, d * d * t, four * t * t / (c * c)});
    out.structure = s;
    out.form = make_form(5, {{{0, 1}, t * c}, {{2, 3}, -t * c * d}});
  } else if (id == "h5") {
    const Scalar a1 = v("a1"), a2 = v("a2");
    StructureData<Scalar> s(5, e_labels);
    s.set_bracket(0, 1, Terms{{4, one}});
    s.set_bracket(2, 3, Terms{{4, one}});
    diag(s, {a1 * a1, one / (a2 * a2), one, one, four / (a2 * a2)});
    out.structure = s;
    out.form = make_form(5, {{{0, 1}, a1 * a1 / a2}, {{2, 3}, a2}});
  } else if (id == "grs") {
    const Scalar r = v("r"), sp = v("s");
    const Scalar a4 = (sp * sp - r * r) / sp;
    StructureData<Scalar> s(5, {"xi", "z1", "z2", "x", "y"});
    s.set_bracket(0, 3, Terms{{1, r}, {4, a4}});
    s.set_bracket(0, 4, Terms{{2, r}, {3, -a4}});
    s.set_bracket(3, 4, Terms{{0, sp}});
    out.structure = s;
    out.form = make_form(5, {{{1, 2}, two * (sp * sp + two * r * r) / (r * r * sp)},
                             {{1, 3}, two / r},
                             {{2, 4}, two / r},
                             {{3, 4}, four / sp}});
  } else if (id == "L59") {
    const Scalar r = v("r");
    StructureData<Scalar> s(5, {"E", "Z1", "Z2", "X", "Y"});
    s.set_bracket(3, 0, Terms{{1, one}});
    s.set_bracket(4, 0, Terms{{2, one}});
    s.set_bracket(3, 4, Terms{{0, one}});
    diag(s, {r * r, r * r * r * r, r * r * r * r, one, one});
    out.structure = s;
    out.form = make_form(5, {{{1, 2}, Scalar(6) * r * r * r},
                             {{1, 3}, -two * r},
                             {{2, 4}, -two * r},
                             {{3, 4}, four / r}});
  } else if (id == "dim3center") {
    StructureData<Scalar> s(5, {"xi", "z1", "z2", "z3", "x"});
    s.set_bracket(4, 0, Terms{{4, v("a1")}, {0, v("a2")}, {1, v("a3")}, {2, v("a4")}, {3, v("a5")}});
    out.structure = s;
  } else if (id == "abelian") {
    const int n = static_cast<int>(std::lround(detail::to_double(v("n"))));
    out.structure = StructureData<Scalar>(n);
  } else if (id == "su2xR2" || id == "sl2xR2") {
    throw InputError("family " + id + " has irrational metric entries; use build_family");
  } else {
    throw InputError("unknown family '" + id + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Central extensions

/// Gauss-Jordan inverse with partial pivoting; pivots with |v| <= tol count
/// as zero (tol = 0 for exact scalars).
template <typename Scalar>
std::optional<exact::Matrix<Scalar>> pivoted_inverse(const exact::Matrix<Scalar>& m, double tol) {
  using std::abs;
  const std::size_t n = m.rows();
  exact::Matrix<Scalar> a = m;
  exact::Matrix<Scalar> inv = exact::Matrix<Scalar>::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (abs(a(r, col)) > abs(a(best, col))) best = r;
    }
    if (detail::to_double(abs(a(best, col))) <= tol || a(best, col) == Scalar(0)) return std::nullopt;
    for (std::size_t c = 0; c < n; ++c) {
      std::swap(a(best, c), a(col, c));
      std::swap(inv(best, c), inv(col, c));
    }
    const Scalar piv = a(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      a(col, c) /= piv;
      inv(col, c) /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a(r, col) == Scalar(0)) continue;
      const Scalar f = a(r, col);
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

template <typename Scalar>
struct ExtensionData {
  StructureData<Scalar> structure;
  /// Coefficients of w(x,y) = <Tx,y> with T|_h = S and T xi = 0.
  std::vector<Scalar> form;
};

/// h (+)_mu R xi with [x,y]_mu = [x,y] + mu(x,y) xi and mu(x,y) = -2<S^{-1}x,y>.
/// Works over exact scalars (tol = 0) and doubles.
template <typename Scalar>
ExtensionData<Scalar> central_extension_data(const StructureData<Scalar>& h, const exact::Matrix<Scalar>& s,
                                             const Scalar& xi_norm, double tol = 0.0) {
  using std::abs;
  auto negligible = [&](const Scalar& x) { return x == Scalar(0) || detail::to_double(abs(x)) <= tol; };
  if (h.dim() != 4) throw PreconditionError("central extensions are built from 4-dimensional algebras");
  const int n = 4;
  if (s.rows() != 4 || s.cols() != 4) throw InputError("S must be 4x4");
  if (!(xi_norm > Scalar(0))) throw InputError("xi_norm must be positive");

  exact::Matrix<Scalar> g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = h.gram(i, j);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Scalar gs(0);
      for (int k = 0; k < n; ++k) gs += g(i, k) * s(k, j) + g(j, k) * s(k, i);
      if (!negligible(gs)) throw PreconditionError("S is not skew-symmetric");
    }
  }
  const auto s_inv = pivoted_inverse(s, tol);
  if (!s_inv) throw PreconditionError("S singular");
  const auto g_inv = pivoted_inverse(g, tol);
  if (!g_inv) throw PreconditionError("Gram matrix is singular");

  // Levi-Civita connection of h from the Koszul formula.
  auto lowered = [&](int i, int j, int k) {
    Scalar v(0);
    for (int m = 0; m < n; ++m) v += h.c(i, j, m) * g(m, k);
    return v;
  };
  for (int i = 0; i < n; ++i) {
    exact::Matrix<Scalar> low(n, n);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        low(k, j) = (lowered(i, j, k) - lowered(j, k, i) + lowered(k, i, j)) / Scalar(2);
      }
    }
    const exact::Matrix<Scalar> nabla = (*g_inv) * low;
    const exact::Matrix<Scalar> a = nabla * s;
    const exact::Matrix<Scalar> b = s * nabla;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (!negligible(a(r, c) - b(r, c))) throw PreconditionError("S not parallel");
      }
    }
  }

  exact::Matrix<Scalar> mu(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Scalar v(0);
      for (int k = 0; k < n; ++k) v += (*s_inv)(k, i) * g(k, j);
      mu(i, j) = Scalar(-2) * v;
    }
  }
  auto mu_of_bracket = [&](int i, int j, int k) {
    Scalar v(0);
    for (int m = 0; m < n; ++m) v += h.c(i, j, m) * mu(m, k);
    return v;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const Scalar d = -mu_of_bracket(i, j, k) + mu_of_bracket(i, k, j) - mu_of_bracket(j, k, i);
        if (!negligible(d)) throw PreconditionError("mu not closed");
      }
    }
  }

  std::vector<std::string> labels = h.labels();
  labels.push_back("xi");
  ExtensionData<Scalar> out{StructureData<Scalar>(5, labels), {}};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.structure.gram(i, j) = g(i, j);
      for (int k = 0; k < n; ++k) out.structure.c(i, j, k) = h.c(i, j, k);
      out.structure.c(i, j, 4) = mu(i, j);
    }
  }
  out.structure.gram(4, 4) = xi_norm * xi_norm;
  const MultiIndexSet pairs(5, 2);
  out.form.assign(pairs.size(), Scalar(0));
  for (int pos = 0; pos < pairs.size(); ++pos) {
    const int i = pairs[pos][0];
    const int j = pairs[pos][1];
    if (j == 4) continue;
    Scalar w(0);
    for (int k = 0; k < n; ++k) w += s(k, i) * g(k, j);
    out.form[pos] = w;
  }
  return out;
}

/// Ingredients of a row of the xi-central classification: the 4-dimensional
/// algebra h in the basis {e1, f1, e2, f2}, its metric, and the invertible
/// parallel skew S with S e1 = a1 f1, S e2 = a2 f2 (a1 = a2 = c for the d_4
/// rows).
template <typename Scalar>
struct ExtensionIngredients {
  StructureData<Scalar> h;
  exact::Matrix<Scalar> s;
  Scalar xi_norm;
};

template <typename Scalar>
ExtensionIngredients<Scalar> extension_ingredients(const std::string& id, const ParamMap<Scalar>& given) {
  const ParamMap<Scalar> p = resolve_params(id, given);
  const Scalar one(1), half = Scalar(1) / Scalar(2);
  using Terms = std::vector<std::pair<int, Scalar>>;
  StructureData<Scalar> h(4, {"e1", "f1", "e2", "f2"});
  enum { e1, f1, e2, f2 };
  Scalar t = one, a1, a2;
  Scalar norm2 = one;  // |e2|^2 = |f2|^2 relative to t
  if (id == "g5" || id == "g6" || id == "g7_delta") {
    a1 = a2 = p.at("c");
  } else {
    a1 = p.at("a1");
    a2 = p.at("a2");
  }
  if (id != "h5") t = p.at("t");
  if (id == "g3") {
    h.set_bracket(e1, e2, Terms{{f2, -one}});
    h.set_bracket(e1, f2, Terms{{e2, one}});
  } else if (id == "g2") {
    h.set_bracket(e2, f2, Terms{{f2, one}});
  } else if (id == "g8_lambda") {
    h.set_bracket(e1, f1, Terms{{f1, p.at("lambda")}});
    h.set_bracket(e1, f2, Terms{{e2, -one}});
    h.set_bracket(e1, e2, Terms{{f2, one}});
  } else if (id == "g4") {
    h.set_bracket(e1, f1, Terms{{f1, one}});
    h.set_bracket(e2, f2, Terms{{f2, one}});
    norm2 = p.at("s");
  } else if (id == "g5") {
    h.set_bracket(e1, f1, Terms{{f1, one}});
    h.set_bracket(e1, e2, Terms{{e2, half}});
    h.set_bracket(e1, f2, Terms{{f2, half}});
    h.set_bracket(e2, f2, Terms{{f1, one}});
  } else if (id == "g6") {
    h.set_bracket(e1, f1, Terms{{e1, -one}});
    h.set_bracket(e1, e2, Terms{{f2, one}});
    h.set_bracket(f1, e2, Terms{{e2, -half}});
    h.set_bracket(f1, f2, Terms{{f2, half}});
  } else if (id == "g7_delta") {
    const Scalar d = p.at("delta");
    h.set_bracket(e1, f1, Terms{{f1, one}});
    h.set_bracket(e1, e2, Terms{{e2, half}, {f2, -one / d}});
    h.set_bracket(e1, f2, Terms{{e2, one / d}, {f2, half}});
    h.set_bracket(e2, f2, Terms{{f1, one}});
  } else if (id != "h5") {
    throw InputError("family " + id + " is not a central extension of the classification");
  }
  h.set_metric_entry(e1, e1, t);
  h.set_metric_entry(f1, f1, t);
  h.set_metric_entry(e2, e2, t * norm2);
  h.set_metric_entry(f2, f2, t * norm2);
  exact::Matrix<Scalar> s(4, 4);
  s(f1, e1) = a1;
  s(e1, f1) = -a1;
  s(f2, e2) = a2;
  s(e2, f2) = -a2;
  return {h, s, one};
}

/// Columns: the tabulated basis E1..E5 in coordinates of {e1, f1, e2, f2, xi}.
template <typename Scalar>
exact::Matrix<Scalar> extension_relabeling(const std::string& id, const ParamMap<Scalar>& given) {
  const ParamMap<Scalar> p = resolve_params(id, given);
  enum { e1, f1, e2, f2, xi };
  const Scalar one(1), two(2);
  exact::Matrix<Scalar> m(5, 5);
  auto col = [&](int a, std::vector<std::pair<int, Scalar>> entries) {
    for (const auto& [row, value] : entries) m(row, a) = value;
  };
  if (id == "g3") {
    const Scalar t = p.at("t"), a1 = p.at("a1"), a2 = p.at("a2");
    col(0, {{e1, one}});
    col(1, {{e2, one}});
    col(2, {{f2, one}});
    col(3, {{f1, a1 / a2}});
    col(4, {{xi, -two * t / a2}});
  } else if (id == "g2") {
    const Scalar t = p.at("t"), a1 = p.at("a1"), a2 = p.at("a2");
    col(0, {{e2, one}});
    col(1, {{f2, one}});
    col(2, {{e1, a1}});
    col(3, {{f1, one / a2}});
    col(4, {{xi, -two * t / a2}});
  } else if (id == "g8_lambda") {
    const Scalar t = p.at("t"), a1 = p.at("a1"), a2 = p.at("a2"), l = p.at("lambda");
    col(0, {{f1, l * a1 / a2}});
    col(1, {{f2, one}});
    col(2, {{e2, one}});
    col(3, {{e1, one / l}});
    col(4, {{xi, two * t / a2}});
  } else if (id == "g4") {
    const Scalar t = p.at("t"), a1 = p.at("a1"), a2 = p.at("a2"), s = p.at("s");
    col(0, {{e1, one}});
    col(1, {{f1, a1}});
    col(2, {{e2, one}});
    col(3, {{f2, a2 / s}});
    col(4, {{xi, -two * t}});
  } else if (id == "g5") {
    const Scalar t = p.at("t"), c = p.at("c");
    col(0, {{e2, one}});
    col(1, {{f2, one}});
    col(2, {{f1, one}});
    col(3, {{e1, one}});
    col(4, {{xi, -two * t / c}});
  } else if (id == "g6") {
    const Scalar t = p.at("t"), c = p.at("c");
    col(0, {{e1, one}, {xi, -two * t / c}});
    col(1, {{e2, one}});
    col(2, {{f2, one}});
    col(3, {{f1, two}});
    col(4, {{xi, -two * t / c}});
  } else if (id == "g7_delta") {
    const Scalar t = p.at("t"), c = p.at("c"), d = p.at("delta");
    col(0, {{e2, one}});
    col(1, {{f2, one}});
    col(2, {{f1, one}});
    col(3, {{e1, d}});
    col(4, {{xi, -two * t / c}});
  } else if (id == "h5") {
    const Scalar a1 = p.at("a1"), a2 = p.at("a2");
    col(0, {{e1, a1}});
    col(1, {{f1, one / a2}});
    col(2, {{e2, one}});
    col(3, {{f2, one}});
    col(4, {{xi, two / a2}});
  } else {
    throw InputError("family " + id + " has no relabeling");
  }
  return m;
}

/// Coefficients of the pullback of a 2-form along the basis change whose
/// columns are the new basis vectors in old coordinates.
template <typename Scalar>
std::vector<Scalar> pull_back_2form(const std::vector<Scalar>& coeffs, const exact::Matrix<Scalar>& p) {
  const int n = static_cast<int>(p.rows());
  const MultiIndexSet pairs(n, 2);
  std::vector<Scalar> out(pairs.size(), Scalar(0));
  for (int r = 0; r < pairs.size(); ++r) {
    const int a = pairs[r][0];
    const int b = pairs[r][1];
    for (int c = 0; c < pairs.size(); ++c) {
      const int i = pairs[c][0];
      const int j = pairs[c][1];
      out[r] += (p(i, a) * p(j, b) - p(j, a) * p(i, b)) * coeffs[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instances

struct FamilyInstance {
  std::string id;
  ParamMap<double> params;
  MetricLieAlgebra algebra;
  std::optional<PForm> reference_form;
  /// Claimed solution-space dimensions, e.g. "cky2", "ky2", "starky2", "parallel2", "cky3".
  std::map<std::string, int> expected_dims;
  /// Claimed flags of the reference form: "strict", "closed", "xi_in_center", "xi_perp_center";
  /// "no_strict" for families admitting none.
  std::map<std::string, bool> expected_flags;
};

inline StructureData<double> to_structure(const MetricLieAlgebra& a) { return a.data(); }

inline exact::Matrix<double> to_exact_matrix(const Eigen::MatrixXd& m) {
  exact::Matrix<double> out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  }
  return out;
}

inline Eigen::MatrixXd to_eigen(const exact::Matrix<double>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  }
  return out;
}

/// The change of basis taking g_{r,s} (basis {xi, z1, z2, x, y}) to the
/// tabulated basis {E, Z1, Z2, X, Y} of its regime; columns are the new
/// vectors in old coordinates.
struct BasisChange {
  std::string regime;  // "L59", "su2xR2" or "sl2xR2"
  double a4 = 0.0;
  Eigen::MatrixXd p;
};

inline BasisChange grs_basis_change(double r, double s) {
  if (!(r > 0.0) || !(s > 0.0)) throw InputError("r, s > 0 required");
  enum { xi, z1, z2, x, y };
  BasisChange out;
  out.a4 = (s * s - r * r) / s;
  out.p = Eigen::MatrixXd::Zero(5, 5);
  auto& p = out.p;
  if (r == s) {
    out.regime = "L59";
    p(xi, 0) = r;
    p(z1, 1) = -r * r;
    p(z2, 2) = -r * r;
    p(x, 3) = 1.0;
    p(y, 4) = 1.0;
    return out;
  }
  const double a4 = out.a4;
  const double k = std::sqrt(std::abs(a4) * a4 * a4 * s);
  // Xbar = r z1 + a4 y, Ybar = r z2 - a4 x.
  Vec xbar = Vec::Zero(5), ybar = Vec::Zero(5);
  xbar(z1) = r;
  xbar(y) = a4;
  ybar(z2) = r;
  ybar(x) = -a4;
  p(z1, 1) = 1.0;
  p(z2, 2) = 1.0;
  if (a4 > 0) {
    out.regime = "su2xR2";
    p(xi, 0) = -1.0 / a4;
    p.col(3) = xbar / k;
    p.col(4) = -ybar / k;
  } else {
    out.regime = "sl2xR2";
    p(xi, 0) = 1.0 / a4;
    p.col(3) = xbar / k;
    p.col(4) = ybar / k;
  }
  return out;
}

/// The tabulated target presentation (brackets and metric) of a regime.
inline StructureData<double> regime_target(const std::string& regime, double r, double s) {
  StructureData<double> t(5, {"E", "Z1", "Z2", "X", "Y"});
  enum { E, Z1, Z2, X, Y };
  using Terms = std::vector<std::pair<int, double>>;
  if (regime == "L59") {
    t.set_bracket(X, E, Terms{{Z1, 1.0}});
    t.set_bracket(Y, E, Terms{{Z2, 1.0}});
    t.set_bracket(X, Y, Terms{{E, 1.0}});
    const double r2 = r * r;
    t.set_metric_entry(E, E, r2);
    t.set_metric_entry(Z1, Z1, r2 * r2);
    t.set_metric_entry(Z2, Z2, r2 * r2);
    return t;
  }
  const double a4 = (s * s - r * r) / s;
  const double cube = std::abs(a4) * a4 * a4 * s;
  const double off = r / std::sqrt(cube);
  t.set_bracket(E, X, Terms{{Y, 1.0}});
  t.set_bracket(Y, E, Terms{{X, 1.0}});
  t.set_metric_entry(E, E, 1.0 / (a4 * a4));
  t.set_metric_entry(X, X, (r * r + a4 * a4) / cube);
  t.set_metric_entry(Y, Y, (r * r + a4 * a4) / cube);
  t.set_metric_entry(Z1, X, off);
  if (regime == "su2xR2") {
    t.set_bracket(X, Y, Terms{{E, 1.0}});
    t.set_metric_entry(Z2, Y, -off);
  } else if (regime == "sl2xR2") {
    t.set_bracket(X, Y, Terms{{E, -1.0}});
    t.set_metric_entry(Z2, Y, off);
  } else {
    throw InputError("unknown regime '" + regime + "'");
  }
  return t;
}

struct BasisChangeReport {
  std::string regime;
  double r = 0.0;
  double s = 0.0;
  double a4 = 0.0;
  double bracket_residual = 0.0;
  double metric_residual = 0.0;
  /// <E,E> and the off-diagonal <Z1,X> of the pushed-forward metric.
  double corner_entry = 0.0;
  double offdiag_entry = 0.0;
  bool passed = false;
};

inline double structure_distance(const StructureData<double>& a, const StructureData<double>& b,
                                 double* metric_distance = nullptr) {
  double br = 0.0, me = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = 0; j < a.dim(); ++j) {
      me = std::max(me, std::abs(a.gram(i, j) - b.gram(i, j)));
      for (int k = 0; k < a.dim(); ++k) br = std::max(br, std::abs(a.c(i, j, k) - b.c(i, j, k)));
    }
  }
  if (metric_distance) *metric_distance = me;
  return br;
}

/// Pushes g_{r,s} through the regime's change of basis and compares with the
/// tabulated brackets and metric entrywise.
inline BasisChangeReport basis_change_verify(double r, double s, double tol = 1e-10) {
  const BasisChange bc = grs_basis_change(r, s);
  const auto grs = family_structure<double>("grs", {{"r", r}, {"s", s}});
  const Eigen::MatrixXd p_inv = bc.p.inverse();
  const StructureData<double> pushed = grs.structure.change_basis(bc.p, p_inv, {"E", "Z1", "Z2", "X", "Y"});
  const StructureData<double> target = regime_target(bc.regime, r, s);
  BasisChangeReport rep;
  rep.regime = bc.regime;
  rep.r = r;
  rep.s = s;
  rep.a4 = bc.a4;
  rep.bracket_residual = structure_distance(pushed, target, &rep.metric_residual);
  rep.corner_entry = pushed.gram(0, 0);
  rep.offdiag_entry = pushed.gram(1, 3);
  rep.passed = rep.bracket_residual <= tol && rep.metric_residual <= tol;
  return rep;
}

namespace detail {

inline PForm form_from(int n, const std::vector<double>& coeffs) {
  return PForm(n, 2, Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size())));
}

inline void fill_expectations(FamilyInstance& inst) {
  const std::string& id = inst.id;
  const auto& ext = extension_family_ids();
  if (std::find(ext.begin(), ext.end(), id) != ext.end()) {
    inst.expected_dims = {{"cky2", 1}, {"ky2", 0}, {"starky2", 1}, {"parallel2", 0}};
    inst.expected_flags = {{"strict", true}, {"closed", true}, {"xi_in_center", true}};
  } else if (id == "grs" || id == "L59" || id == "su2xR2" || id == "sl2xR2") {
    inst.expected_dims = {{"cky2", 1}, {"ky2", 0}, {"starky2", 0}, {"cky3", 1}, {"ky3", 0}, {"starky3", 0}};
    inst.expected_flags = {{"strict", true}, {"closed", false}, {"xi_perp_center", true}};
  } else if (id == "dim3center") {
    inst.expected_flags = {{"no_strict", true}};
  } else if (id == "abelian") {
    const int n = inst.algebra.dim();
    const int m = binomial(n, 2);
    inst.expected_dims = {{"cky2", m}, {"ky2", m}, {"starky2", m}, {"parallel2", m}};
    inst.expected_flags = {{"no_strict", true}};
  }
}

}  // namespace detail

inline FamilyInstance build_family(const std::string& id, const ParamMap<double>& given = {},
                                   ToleranceConfig tol = {}) {
  const ParamMap<double> params = resolve_params(id, given);
  std::optional<MetricLieAlgebra> algebra;
  std::optional<PForm> form;
  if (id == "su2xR2" || id == "sl2xR2") {
    const double r = params.at("r");
    const double s = params.at("s");
    const BasisChange bc = grs_basis_change(r, s);
    const auto grs = family_structure<double>("grs", {{"r", r}, {"s", s}});
    algebra.emplace(regime_target(bc.regime, r, s), tol);
    const PForm w = detail::form_from(5, *grs.form);
    form = PForm(5, 2, pullback_matrix(bc.p, 2) * w.coeffs());
  } else {
    const FamilyData<double> data = family_structure<double>(id, params);
    algebra.emplace(data.structure, tol);
    if (data.form) form = detail::form_from(algebra->dim(), *data.form);
  }
  FamilyInstance inst{id, params, std::move(*algebra), form, {}, {}};
  detail::fill_expectations(inst);
  return inst;
}

/// Builds the central extension of h by mu(x,y) = -2<S^{-1}x,y> with |xi| = xi_norm.
inline FamilyInstance central_extension(const MetricLieAlgebra& h, const Endo& s, double xi_norm) {
  const auto ext = central_extension_data<double>(h.data(), to_exact_matrix(s), xi_norm, h.tol().residual);
  MetricLieAlgebra algebra(ext.structure, h.tol());
  PForm form = detail::form_from(5, ext.form);
  FamilyInstance inst{"extension", {}, std::move(algebra), std::move(form), {}, {}};
  inst.expected_dims = {{"cky2", 1}};
  inst.expected_flags = {{"strict", true}, {"xi_in_center", true}};
  return inst;
}

/// Ten fixed-seed draws of the dim3center parameters, integers in [-3, 3],
/// never all zero.
inline std::vector<ParamMap<double>> dim3center_draws(std::uint64_t seed = 20240531, int count = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-3, 3);
  std::vector<ParamMap<double>> out;
  while (static_cast<int>(out.size()) < count) {
    ParamMap<double> p;
    bool nonzero = false;
    for (int i = 1; i <= 5; ++i) {
      const int v = dist(rng);
      nonzero |= v != 0;
      p["a" + std::to_string(i)] = v;
    }
    if (nonzero) out.push_back(p);
  }
  return out;
}

/// Documented sweep parameters of the eight extension families.
inline std::vector<ParamMap<double>> sweep_params(const std::string& id) {
  std::vector<ParamMap<double>> out;
  for (double t : {1.0, 2.0}) {
    if (id == "g5" || id == "g6") {
      out.push_back({{"t", t}, {"c", 1.0}});
    } else if (id == "g7_delta") {
      out.push_back({{"t", t}, {"c", 1.0}, {"delta", 1.0}});
    } else {
      for (double a1 : {1.0, 3.0}) {
        if (id == "h5") {
          if (t == 1.0) out.push_back({{"a1", a1}, {"a2", 2.0}});
        } else if (id == "g4") {
          for (double s : {0.5, 1.0}) {
            if (s == 1.0 && a1 < 2.0) continue;  // a1 >= a2 required at s = 1
            out.push_back({{"t", t}, {"s", s}, {"a1", a1}, {"a2", 2.0}});
          }
        } else if (id == "g8_lambda") {
          out.push_back({{"t", t}, {"a1", a1}, {"a2", 2.0}, {"lambda", 1.0}});
        } else {
          out.push_back({{"t", t}, {"a1", a1}, {"a2", 2.0}});
        }
      }
    }
  }
  return out;
}

inline const std::vector<std::pair<double, double>>& grs_sweep() {
  static const std::vector<std::pair<double, double>> v = {{1.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}, {0.5, 1.5}};
  return v;
}

/// Parses "k=v,k=v" where each v is a decimal or a fraction a/b.
inline ParamMap<exact::Rational> parse_params_exact(const std::string& text) {
  ParamMap<exact::Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("expected k=v in '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    exact::Rational value;
    try {
      const auto slash = val.find('/');
      auto decimal = [](const std::string& s) {
        std::size_t pos = 0;
        const bool neg = !s.empty() && s[0] == '-';
        const std::string body = neg || (!s.empty() && s[0] == '+') ? s.substr(1) : s;
        const auto dot = body.find('.');
        std::string digits = dot == std::string::npos ? body : body.substr(0, dot) + body.substr(dot + 1);
        if (digits.empty()) throw InputError("empty number");
        for (char c : digits) {
          if (c < '0' || c > '9') throw InputError("bad number '" + s + "'");
        }
        (void)pos;
        // A leading zero would make cpp_int read the digits as octal.
        const auto first = digits.find_first_not_of('0');
        exact::Rational v{boost::multiprecision::cpp_int(first == std::string::npos ? "0" : digits.substr(first))};
        if (dot != std::string::npos) {
          v /= exact::Rational(boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                          static_cast<unsigned>(body.size() - dot - 1)));
        }
        return neg ? exact::Rational(-v) : v;
      };
      if (slash == std::string::npos) {
        value = decimal(val);
      } else {
        const exact::Rational den = decimal(val.substr(slash + 1));
        if (den == 0) throw InputError("zero denominator");
        value = decimal(val.substr(0, slash)) / den;
      }
    } catch (const InputError&) {
      throw InputError("bad value for parameter '" + key + "': '" + val + "'");
    }
    out[key] = value;
  }
  return out;
}

inline ParamMap<double> to_double_params(const ParamMap<exact::Rational>& p) {
  ParamMap<double> out;
  for (const auto& [k, v] : p) out[k] = static_cast<double>(v);
  return out;
}

inline ParamMap<double> parse_params(const std::string& text) { return to_double_params(parse_params_exact(text)); }

}  // namespace ckylab
