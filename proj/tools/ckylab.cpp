// Command-line front end: solve, verify, catalog.
//   exit 0 = pass, 1 = a claimed expectation failed, 2 = input error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ckylab/catalog.hpp"
#include "ckylab/cky.hpp"
#include "ckylab/io.hpp"
#include "ckylab/verify.hpp"

namespace {

using ckylab::Json;

struct Common {
  std::string format = "json";
  std::optional<double> tol;
  std::optional<double> rank_tol;
  std::optional<double> jacobi_tol;
};

ckylab::ToleranceConfig make_tolerance(const Common& c) {
  ckylab::ToleranceConfig tol;
  if (const char* env = std::getenv("CKYLAB_TOL")) {
    try {
      std::size_t used = 0;
      tol.residual = std::stod(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ckylab::InputError(std::string("CKYLAB_TOL is not a number: '") + env + "'");
    }
  }
  if (c.tol) tol.residual = *c.tol;
  if (c.rank_tol) tol.rank_rel = *c.rank_tol;
  if (c.jacobi_tol) tol.jacobi = *c.jacobi_tol;
  tol.validate();
  return tol;
}

void print_text(const Json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) print_text(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) print_text(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out << prefix << " = " << j.dump() << "\n";
  }
}

int emit(const ckylab::RunReport& report, const std::string& format) {
  const Json j = report.to_json();
  if (format == "text") {
    print_text(j, "", std::cout);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  if (report.status == "pass") return 0;
  if (report.status == "fail") return 1;
  return 2;
}

Json classification_json(const ckylab::CKYClassification& cl) {
  return {{"is_strict", cl.is_strict},
          {"theta", cl.theta.coeffs().size() ? std::vector<double>(cl.theta.coeffs().data(),
                                                                   cl.theta.coeffs().data() + cl.theta.coeffs().size())
                                             : std::vector<double>{}},
          {"xi", std::vector<double>(cl.xi.data(), cl.xi.data() + cl.xi.size())},
          {"xi_norm", cl.xi_norm},
          {"closed", cl.closed},
          {"coclosed", cl.coclosed},
          {"parallel", cl.parallel},
          {"xi_in_center", cl.xi_in_center},
          {"xi_perp_center", cl.xi_perp_center},
          {"cky_residual", cl.cky_residual},
          {"t_xi_residual", cl.t_xi_residual},
          {"restricted_rank", cl.restricted_rank},
          {"derived_projection", cl.derived_projection}};
}

std::string dims_key(ckylab::FormKind kind, int degree) {
  switch (kind) {
    case ckylab::FormKind::cky: return "cky" + std::to_string(degree);
    case ckylab::FormKind::ky: return "ky" + std::to_string(degree);
    case ckylab::FormKind::star_ky: return "starky" + std::to_string(degree);
    case ckylab::FormKind::parallel: return "parallel" + std::to_string(degree);
  }
  return "";
}

int run_solve(const Common& common, const std::string& input, const std::string& family, const std::string& params,
              int degree, const std::string& kind_name) {
  const auto start = std::chrono::steady_clock::now();
  const ckylab::ToleranceConfig tol = make_tolerance(common);
  const ckylab::FormKind kind = ckylab::parse_form_kind(kind_name);
  ckylab::RunReport report;
  report.command = "solve";
  report.inputs = {{"degree", degree}, {"kind", std::string(ckylab::to_string(kind))}, {"tol", tol.residual}};

  std::optional<ckylab::MetricLieAlgebra> algebra;
  std::optional<ckylab::PForm> reference;
  std::map<std::string, int> expected;
  if (!input.empty() == !family.empty()) throw ckylab::InputError("give exactly one of --input or --family");
  if (!input.empty()) {
    report.inputs["input"] = input;
    const auto loaded = ckylab::algebra_from_json(ckylab::read_json_file(input));
    algebra.emplace(loaded.structure, tol);
    reference = loaded.reference_form;
  } else {
    const auto p = ckylab::parse_params(params);
    ckylab::FamilyInstance inst = ckylab::build_family(family, p, tol);
    report.inputs["family"] = family;
    report.inputs["params"] = ckylab::detail::params_json(inst.params);
    algebra.emplace(inst.algebra);
    reference = inst.reference_form;
    expected = inst.expected_dims;
  }
  const ckylab::MetricLieAlgebra& a = *algebra;
  const ckylab::SolutionSpace space = ckylab::solve_form_space(a, degree, kind);
  Json basis = Json::array();
  for (const auto& f : space.basis) basis.push_back(ckylab::form_to_json(f));
  Json results = {{"dimension", space.dimension()},
                  {"system_rank", space.system_rank},
                  {"sv_gap", space.sv_gap},
                  {"basis", basis}};
  bool ok = true;
  if (degree == 2 && kind == ckylab::FormKind::cky) {
    Json cls = Json::array();
    for (const auto& f : space.basis) cls.push_back(classification_json(ckylab::extract_associated_vector(a, f)));
    results["classification"] = cls;
    results["strict_count"] = ckylab::strict_count(a, space);
  }
  if (reference && reference->degree() == degree) {
    const double res = ckylab::projection_residual(a, space, *reference);
    results["reference_projection_residual"] = res;
    if (kind == ckylab::FormKind::cky) ok = ok && res <= 1e-8;
  }
  const auto it = expected.find(dims_key(kind, degree));
  if (it != expected.end()) {
    results["expected_dimension"] = it->second;
    ok = ok && it->second == space.dimension();
  }
  report.results = results;
  report.status = ok ? "pass" : "fail";
  report.wall_time_ms = static_cast<std::int64_t>(ckylab::detail::elapsed_ms(start));
  return emit(report, common.format);
}

int run_catalog_list(const Common& common) {
  ckylab::RunReport report;
  report.command = "catalog list";
  if (common.format == "text") {
    for (const auto& f : ckylab::family_table()) {
      std::string names;
      for (const auto& p : f.params) names += (names.empty() ? "" : ",") + p;
      std::cout << f.id << "  params=" << names << "  constraints: " << f.constraints << "  source: " << f.source
                << "\n";
    }
    return 0;
  }
  Json fams = Json::array();
  for (const auto& f : ckylab::family_table()) {
    fams.push_back({{"id", f.id}, {"params", f.params}, {"constraints", f.constraints}, {"source", f.source}});
  }
  report.results = {{"families", fams}};
  return emit(report, common.format);
}

int run_catalog_build(const Common& common, const std::string& family, const std::string& params,
                      const std::string& output) {
  const ckylab::ToleranceConfig tol = make_tolerance(common);
  const ckylab::FamilyInstance inst = ckylab::build_family(family, ckylab::parse_params(params), tol);
  const Json j = ckylab::algebra_to_json(inst.algebra, inst.reference_form);
  if (output.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(output);
    if (!out) throw ckylab::InputError("cannot write '" + output + "'");
    out << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ckylab: conformal Killing-Yano forms on metric Lie algebras"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--format", common.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("--tol", common.tol, "residual tolerance (overrides CKYLAB_TOL)");
    cmd->add_option("--rank-tol", common.rank_tol, "relative singular-value threshold");
    cmd->add_option("--jacobi-tol", common.jacobi_tol, "Jacobi/antisymmetry tolerance");
  };

  std::string input, family, params, kind = "cky", output;
  int degree = 2;
  auto* solve = app.add_subcommand("solve", "solve for CKY / KY / *-KY / parallel p-forms");
  solve->add_option("--input", input, "algebra JSON file");
  solve->add_option("--family", family, "catalog family id");
  solve->add_option("--params", params, "k=v,... (v may be a fraction a/b)");
  solve->add_option("--degree", degree, "form degree p")->check(CLI::Range(1, 11));
  solve->add_option("--kind", kind, "cky | ky | star-ky | parallel");
  add_common(solve);

  std::string target;
  std::uint64_t seed = 20240531;
  auto* verify = app.add_subcommand("verify", "check the tabulated claims");
  verify->add_option("target", target, "tables|grs|holonomy|identities|basis|extensions|negative|properties|all")
      ->required();
  verify->add_option("--seed", seed, "seed for randomised draws");
  add_common(verify);

  auto* catalog = app.add_subcommand("catalog", "list or build catalog families");
  catalog->require_subcommand(1);
  auto* list = catalog->add_subcommand("list", "one line per family");
  add_common(list);
  auto* build = catalog->add_subcommand("build", "emit a family as algebra JSON");
  build->add_option("--family", family, "catalog family id")->required();
  build->add_option("--params", params, "k=v,...");
  build->add_option("--output", output, "output file (default stdout)");
  add_common(build);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return run_solve(common, input, family, params, degree, kind);
    if (verify->parsed()) return emit(ckylab::run_verify(target, seed, make_tolerance(common)), common.format);
    if (list->parsed()) return run_catalog_list(common);
    if (build->parsed()) return run_catalog_build(common, family, params, output);
  } catch (const ckylab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
