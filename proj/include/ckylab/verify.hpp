#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "cky.hpp"
#include "connection.hpp"
#include "forms.hpp"
#include "io.hpp"
#include "liealg.hpp"

namespace ckylab {

/// Number of independent strict directions in a CKY 2-form space: the rank
/// of w -> d*w restricted to the (orthonormal) basis.
inline int strict_count(const MetricLieAlgebra& alg, const SolutionSpace& space) {
  if (space.dimension() == 0) return 0;
  const Connection conn = levi_civita(alg);
  Eigen::MatrixXd m(alg.dim(), space.dimension());
  for (int i = 0; i < space.dimension(); ++i) m.col(i) = codifferential(conn, space.basis[i]).coeffs();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  int count = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > alg.tol().residual) ++count;
  }
  return count;
}

namespace detail {

inline Json params_json(const ParamMap<double>& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

inline std::string params_text(const ParamMap<double>& p) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : p) {
    os << (first ? "" : ",") << k << "=" << v;
    first = false;
  }
  return os.str();
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline Json claim(const std::string& name, bool passed) { return {{"name", name}, {"passed", passed}}; }

}  // namespace detail

/// Dimensions of the four solution spaces in one degree.
struct KindDims {
  SolutionSpace cky, ky, star_ky, parallel;
};

inline KindDims solve_all_kinds(const MetricLieAlgebra& alg, int degree) {
  return {solve_form_space(alg, degree, FormKind::cky), solve_form_space(alg, degree, FormKind::ky),
          solve_form_space(alg, degree, FormKind::star_ky), solve_form_space(alg, degree, FormKind::parallel)};
}

/// Classification families: dimensions, form match, classification, geometry.
inline Json verify_tables(ToleranceConfig tol = {}) {
  Json claims = Json::array();
  for (const std::string& id : extension_family_ids()) {
    for (const auto& params : sweep_params(id)) {
      const auto start = std::chrono::steady_clock::now();
      const FamilyInstance inst = build_family(id, params, tol);
      const KindDims d = solve_all_kinds(inst.algebra, 2);
      const double proj = projection_residual(inst.algebra, d.cky, *inst.reference_form);
      const CKYClassification cl = extract_associated_vector(inst.algebra, *inst.reference_form);
      const Eigen::MatrixXd z = center(inst.algebra);
      const double ms = detail::elapsed_ms(start);
      const bool dims_ok = d.cky.dimension() == 1 && d.ky.dimension() == 0 && d.star_ky.dimension() == 1 &&
                           d.parallel.dimension() == 0;
      const bool geometry_ok = cl.t_xi_residual <= 1e-10 && cl.restricted_rank == 4 &&
                               cl.derived_projection > 1e-6 && cl.xi_in_center && z.cols() == 1;
      const bool ok = dims_ok && proj <= 1e-8 && cl.is_strict && cl.closed && geometry_ok && ms <= 1000.0;
      Json c = detail::claim(id + "[" + detail::params_text(params) + "]", ok);
      c["family"] = id;
      c["params"] = detail::params_json(params);
      c["cky2"] = d.cky.dimension();
      c["ky2"] = d.ky.dimension();
      c["starky2"] = d.star_ky.dimension();
      c["parallel2"] = d.parallel.dimension();
      c["form_projection_residual"] = proj;
      c["sv_gap"] = d.cky.sv_gap;
      c["strict"] = cl.is_strict;
      c["closed"] = cl.closed;
      c["xi_norm"] = cl.xi_norm;
      c["xi_spans_center"] = cl.xi_in_center && z.cols() == 1;
      c["t_xi_residual"] = cl.t_xi_residual;
      c["restricted_rank"] = cl.restricted_rank;
      c["derived_projection"] = cl.derived_projection;
      c["runtime_ms"] = ms;
      claims.push_back(c);
    }
  }
  return claims;
}

/// The g_{r,s} sweep and the tabulated normal forms.
inline Json verify_grs(ToleranceConfig tol = {}) {
  Json claims = Json::array();
  std::vector<std::pair<std::string, ParamMap<double>>> cases;
  for (const auto& [r, s] : grs_sweep()) cases.push_back({"grs", {{"r", r}, {"s", s}}});
  cases.push_back({"L59", {{"r", 1.0}}});
  cases.push_back({"L59", {{"r", 2.0}}});
  cases.push_back({"su2xR2", {{"r", 1.0}, {"s", 2.0}}});
  cases.push_back({"su2xR2", {{"r", 0.5}, {"s", 1.5}}});
  cases.push_back({"sl2xR2", {{"r", 2.0}, {"s", 1.0}}});
  for (const auto& [id, params] : cases) {
    const FamilyInstance inst = build_family(id, params, tol);
    const MetricLieAlgebra& a = inst.algebra;
    const KindDims d2 = solve_all_kinds(a, 2);
    const KindDims d3 = solve_all_kinds(a, 3);
    const double proj = projection_residual(a, d2.cky, *inst.reference_form);
    const CKYClassification cl = extract_associated_vector(a, *inst.reference_form);
    double hodge = 0.0;
    for (const PForm& w : d2.cky.basis) hodge = std::max(hodge, projection_residual(a, d3.cky, hodge_star(a, w)));
    double hodge_ky = 0.0;
    for (const PForm& w : d2.ky.basis) {
      hodge_ky = std::max(hodge_ky, projection_residual(a, d3.star_ky, hodge_star(a, w)));
    }
    bool ok = d2.cky.dimension() == 1 && d2.ky.dimension() == 0 && d2.star_ky.dimension() == 0 &&
              d3.cky.dimension() == 1 && d3.ky.dimension() == 0 && d3.star_ky.dimension() == 0 && proj <= 1e-8 &&
              hodge <= 1e-9 && hodge_ky <= 1e-9 && cl.is_strict && !cl.closed && cl.xi_perp_center &&
              cl.t_xi_residual <= 1e-10 && cl.restricted_rank == 4 && cl.derived_projection > 1e-6;
    Json c = detail::claim(id + "[" + detail::params_text(params) + "]", false);
    c["family"] = id;
    c["params"] = detail::params_json(params);
    c["cky2"] = d2.cky.dimension();
    c["ky2"] = d2.ky.dimension();
    c["starky2"] = d2.star_ky.dimension();
    c["cky3"] = d3.cky.dimension();
    c["ky3"] = d3.ky.dimension();
    c["starky3"] = d3.star_ky.dimension();
    c["form_projection_residual"] = proj;
    c["hodge_transport_residual"] = hodge;
    c["strict"] = cl.is_strict;
    c["closed"] = cl.closed;
    c["xi_perp_center"] = cl.xi_perp_center;
    c["t_xi_residual"] = cl.t_xi_residual;
    c["restricted_rank"] = cl.restricted_rank;
    c["derived_projection"] = cl.derived_projection;
    if (id == "grs") {
      const double r = params.at("r");
      const double s = params.at("s");
      // d w (x, z2, xi) with basis {xi, z1, z2, x, y}.
      const double dw = exterior_derivative(a, *inst.reference_form).on_basis({3, 2, 0});
      c["dw_x_z2_xi"] = dw;
      c["dw_expected"] = -6.0 * r / s;
      ok = ok && std::abs(dw + 6.0 * r / s) <= 1e-9;
    }
    c["passed"] = ok;
    claims.push_back(c);
  }
  return claims;
}

/// Holonomy dimension on sampled instances.
inline Json verify_holonomy(ToleranceConfig tol = {}) {
  Json claims = Json::array();
  const std::vector<std::pair<std::string, ParamMap<double>>> cases = {
      {"L59", {{"r", 1.0}}},
      {"L59", {{"r", 2.0}}},
      {"grs", {{"r", 1.0}, {"s", 2.0}}},
      {"grs", {{"r", 2.0}, {"s", 1.0}}},
      {"g3", {{"t", 1.0}, {"a1", 1.0}, {"a2", 1.0}}},
      {"g2", {}},
      {"g8_lambda", {}},
      {"g4", {}},
      {"g5", {}},
      {"g6", {}},
      {"g7_delta", {}},
      {"h5", {}},
  };
  for (const auto& [id, params] : cases) {
    const FamilyInstance inst = build_family(id, params, tol);
    const HolonomyReport h = holonomy_algebra(inst.algebra);
    Json c = detail::claim(id + "[" + detail::params_text(inst.params) + "]", h.dimension == 10 && h.converged);
    c["family"] = id;
    c["dimension"] = h.dimension;
    c["iterations"] = h.iterations;
    c["converged"] = h.converged;
    claims.push_back(c);
  }
  return claims;
}

/// Structural identities on g_{r,s}, a perturbed tensor, and the abelian case.
inline Json verify_identities(ToleranceConfig tol = {}) {
  Json claims = Json::array();
  auto report_json = [](const IdentityReport& rep) {
    Json r = Json::object();
    for (const auto& c : rep.checks) r[c.name] = c.residual;
    return r;
  };
  for (const auto& [r, s] : grs_sweep()) {
    const FamilyInstance inst = build_family("grs", {{"r", r}, {"s", s}}, tol);
    const Endo t = to_endomorphism(inst.algebra, *inst.reference_form);
    const CKYClassification cl = extract_associated_vector(inst.algebra, *inst.reference_form);
    const IdentityReport rep = structural_identity_report(inst.algebra, t, cl.xi);
    Json c = detail::claim("grs[r=" + std::to_string(r) + ",s=" + std::to_string(s) + "]",
                           rep.passed && rep.max_residual <= 1e-10);
    c["max_residual"] = rep.max_residual;
    c["residuals"] = report_json(rep);
    claims.push_back(c);

    Endo perturbed = t;
    perturbed(1, 3) += 1e-3;
    const IdentityReport bad = structural_identity_report(inst.algebra, perturbed, cl.xi);
    Json p = detail::claim("grs_perturbed[r=" + std::to_string(r) + ",s=" + std::to_string(s) + "]",
                           !bad.passed && bad.max_residual > 1e-4);
    p["max_residual"] = bad.max_residual;
    claims.push_back(p);
  }
  const FamilyInstance ab = build_family("abelian", {}, tol);
  Endo t = Endo::Zero(5, 5);
  t(1, 0) = 1.0;
  t(0, 1) = -1.0;
  const IdentityReport rep = structural_identity_report(ab.algebra, t, Vec::Zero(5));
  Json c = detail::claim("abelian_xi_zero_rejected", !rep.passed);
  c["max_residual"] = rep.max_residual;
  c["residuals"] = report_json(rep);
  claims.push_back(c);
  return claims;
}

/// Basis changes from g_{r,s} to the three tabulated regimes.
inline Json verify_basis(ToleranceConfig tol = {}) {
  (void)tol;
  Json claims = Json::array();
  for (const auto& [r, s] : grs_sweep()) {
    const BasisChangeReport rep = basis_change_verify(r, s);
    bool ok = rep.passed;
    Json c = detail::claim("basis_change[r=" + std::to_string(r) + ",s=" + std::to_string(s) + "]", false);
    c["regime"] = rep.regime;
    c["a4"] = rep.a4;
    c["bracket_residual"] = rep.bracket_residual;
    c["metric_residual"] = rep.metric_residual;
    c["corner_entry"] = rep.corner_entry;
    c["offdiag_entry"] = rep.offdiag_entry;
    if (rep.regime != "L59") {
      const double expected_corner = 1.0 / (rep.a4 * rep.a4);
      const double expected_off = r / std::sqrt(std::abs(rep.a4) * rep.a4 * rep.a4 * s);
      ok = ok && std::abs(rep.corner_entry - expected_corner) <= 1e-10 &&
           std::abs(rep.offdiag_entry - expected_off) <= 1e-10;
    }
    c["passed"] = ok;
    claims.push_back(c);
  }
  return claims;
}

/// Central extensions from the classification ingredients, in doubles.
/// (The exact-rational comparison lives in the test suite.)
inline Json verify_extensions(ToleranceConfig tol = {}) {
  Json claims = Json::array();
  for (const std::string& id : extension_family_ids()) {
    for (const auto& params : sweep_params(id)) {
      const auto ing = extension_ingredients<double>(id, params);
      const MetricLieAlgebra h(ing.h, tol);
      const FamilyInstance ext = central_extension(h, to_eigen(ing.s), ing.xi_norm);
      const double res = cky_residual(ext.algebra, *ext.reference_form);
      const CKYClassification cl = extract_associated_vector(ext.algebra, *ext.reference_form);
      const auto p = extension_relabeling<double>(id, params);
      const Eigen::MatrixXd pe = to_eigen(p);
      const StructureData<double> relabeled = ext.algebra.data().change_basis(pe, Eigen::MatrixXd(pe.inverse()));
      const auto target = family_structure<double>(id, params);
      double metric_res = 0.0;
      const double bracket_res = structure_distance(relabeled, target.structure, &metric_res);
      const auto form = pull_back_2form(std::vector<double>(ext.reference_form->coeffs().data(),
                                                            ext.reference_form->coeffs().data() +
                                                                ext.reference_form->coeffs().size()),
                                        p);
      double form_res = 0.0;
      for (std::size_t i = 0; i < form.size(); ++i) form_res = std::max(form_res, std::abs(form[i] - (*target.form)[i]));
      const bool ok = res <= 1e-10 && cl.is_strict && cl.xi_in_center && bracket_res <= 1e-12 &&
                      metric_res <= 1e-12 && form_res <= 1e-12;
      Json c = detail::claim(id + "[" + detail::params_text(params) + "]", ok);
      c["cky_residual"] = res;
      c["relabel_bracket_residual"] = bracket_res;
      c["relabel_metric_residual"] = metric_res;
      c["relabel_form_residual"] = form_res;
      claims.push_back(c);
    }
  }
  // A singular S must be rejected.
  const auto ing = extension_ingredients<double>("h5", {});
  Endo singular = to_eigen(ing.s);
  singular(2, 3) = singular(3, 2) = 0.0;
  bool rejected = false;
  try {
    central_extension(MetricLieAlgebra(ing.h, tol), singular, 1.0);
  } catch (const PreconditionError&) {
    rejected = true;
  }
  claims.push_back(detail::claim("singular_S_rejected", rejected));
  return claims;
}

/// Negative results: no strict CKY with a 3-dimensional center; the abelian case.
inline Json verify_negative(std::uint64_t seed = 20240531, ToleranceConfig tol = {}) {
  Json claims = Json::array();
  for (const auto& params : dim3center_draws(seed)) {
    const FamilyInstance inst = build_family("dim3center", params, tol);
    const SolutionSpace cky = solve_form_space(inst.algebra, 2, FormKind::cky);
    const int strict = strict_count(inst.algebra, cky);
    Json c = detail::claim("dim3center[" + detail::params_text(params) + "]",
                           strict == 0 && center(inst.algebra).cols() == 3);
    c["center_dim"] = center(inst.algebra).cols();
    c["cky2"] = cky.dimension();
    c["strict_count"] = strict;
    claims.push_back(c);
  }
  const FamilyInstance ab = build_family("abelian", {}, tol);
  const KindDims d = solve_all_kinds(ab.algebra, 2);
  const int strict = strict_count(ab.algebra, d.cky);
  Json c = detail::claim("abelian5", d.cky.dimension() == 10 && d.ky.dimension() == 10 &&
                                         d.parallel.dimension() == 10 && strict == 0);
  c["cky2"] = d.cky.dimension();
  c["ky2"] = d.ky.dimension();
  c["parallel2"] = d.parallel.dimension();
  c["strict_count"] = strict;
  claims.push_back(c);
  return claims;
}

/// Randomised property checks (fixed seed) on every catalog family.
inline Json verify_properties(std::uint64_t seed = 20240531, ToleranceConfig tol = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random_form = [&](int n, int p) {
    Eigen::VectorXd c(binomial(n, p));
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
    return PForm(n, p, c);
  };
  double koszul = 0.0, dd = 0.0, star2 = 0.0, adjoint = 0.0, codiff = 0.0, angle = 0.0;
  for (const FamilyInfo& info : family_table()) {
    const FamilyInstance inst = build_family(info.id, {}, tol);
    const MetricLieAlgebra& a = inst.algebra;
    const int n = a.dim();
    const Connection conn = levi_civita(a);
    koszul = std::max({koszul, conn.metric_residual(), conn.torsion_residual()});
    for (int p = 0; p + 2 <= n; ++p) {
      const PForm f = random_form(n, p);
      dd = std::max(dd, exterior_derivative(a, exterior_derivative(a, f)).max_abs());
    }
    for (int p = 0; p <= n; ++p) {
      const PForm f = random_form(n, p);
      const double sign = ((p * (n - p)) % 2 == 0) ? 1.0 : -1.0;
      star2 = std::max(star2, (hodge_star(a, hodge_star(a, f)) - sign * f).max_abs() / std::max(1.0, f.max_abs()));
    }
    for (int p = 1; p <= n; ++p) {
      const PForm f = random_form(n, p);
      codiff = std::max(codiff, (codifferential(conn, f) - codifferential_via_hodge(a, f)).max_abs());
    }
    if (is_unimodular(a)) {
      for (int p = 0; p + 1 <= n; ++p) {
        const PForm al = random_form(n, p);
        const PForm be = random_form(n, p + 1);
        adjoint = std::max(adjoint, std::abs(inner_product(a, exterior_derivative(a, al), be) -
                                             inner_product(a, al, codifferential(conn, be))));
      }
    }
    if (n >= 3) {
      const SolutionSpace general = solve_form_space(a, 2, FormKind::cky);
      const NullspaceResult ns = nullspace(assemble_cky_system(a, 2, Formulation::symmetrized) *
                                               pullback_matrix(orthonormal_frame(a.gram()), 2).inverse(),
                                           a.tol().rank_rel);
      if (ns.basis.cols() != general.dimension()) {
        angle = 1.0;
      } else if (ns.basis.cols() > 0) {
        const Eigen::MatrixXd u = frame_basis(a, general);
        const Eigen::MatrixXd r = u - ns.basis * (ns.basis.transpose() * u);
        angle = std::max(angle, Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()(0));
      }
    }
  }
  Json claims = Json::array();
  auto add = [&](const std::string& name, double value, double bound) {
    Json c = detail::claim(name, value <= bound);
    c["max_residual"] = value;
    c["bound"] = bound;
    claims.push_back(c);
  };
  add("koszul_compatibility_torsion", koszul, 1e-12);
  add("d_squared_zero", dd, 1e-10);
  add("double_star_sign_law", star2, 1e-12);
  add("d_codifferential_adjoint_unimodular", adjoint, 1e-9);
  add("codifferential_frame_vs_hodge", codiff, 1e-10);
  add("formulation_subspace_angle", angle, 1e-8);
  return claims;
}

struct RunReport {
  std::string command;
  Json inputs = Json::object();
  Json results = Json::object();
  std::string status = "pass";
  std::int64_t wall_time_ms = 0;

  Json to_json() const {
    return {{"command", command},
            {"inputs", inputs},
            {"results", results},
            {"status", status},
            {"wall_time_ms", wall_time_ms}};
  }
};

inline const std::vector<std::string>& verify_targets() {
  static const std::vector<std::string> t = {"basis",  "extensions", "grs",        "holonomy",
                                             "identities", "negative", "properties", "tables"};
  return t;
}

/// Runs one verification group (or "all"); status is "pass" iff every claim passed.
inline RunReport run_verify(const std::string& target, std::uint64_t seed = 20240531, ToleranceConfig tol = {}) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.command = "verify " + target;
  report.inputs = {{"target", target}, {"seed", seed}, {"tol", {{"jacobi", tol.jacobi}, {"rank_rel", tol.rank_rel}, {"residual", tol.residual}}}};
  std::vector<std::string> groups;
  if (target == "all") {
    groups = verify_targets();
  } else if (std::find(verify_targets().begin(), verify_targets().end(), target) != verify_targets().end()) {
    groups = {target};
  } else {
    throw InputError("unknown verify target '" + target + "'");
  }
  bool all_ok = true;
  for (const std::string& g : groups) {
    Json claims;
    if (g == "tables") claims = verify_tables(tol);
    else if (g == "grs") claims = verify_grs(tol);
    else if (g == "holonomy") claims = verify_holonomy(tol);
    else if (g == "identities") claims = verify_identities(tol);
    else if (g == "basis") claims = verify_basis(tol);
    else if (g == "extensions") claims = verify_extensions(tol);
    else if (g == "negative") claims = verify_negative(seed, tol);
    else if (g == "properties") claims = verify_properties(seed, tol);
    int passed = 0;
    for (const auto& c : claims) passed += c.at("passed").get<bool>() ? 1 : 0;
    const bool ok = passed == static_cast<int>(claims.size());
    all_ok = all_ok && ok;
    report.results[g] = {{"claims", claims}, {"passed", passed}, {"total", claims.size()}, {"status", ok ? "pass" : "fail"}};
  }
  report.status = all_ok ? "pass" : "fail";
  report.wall_time_ms = static_cast<std::int64_t>(detail::elapsed_ms(start));
  return report;
}

}  // namespace ckylab
