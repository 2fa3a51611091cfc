#include <gtest/gtest.h>

#include "ckylab/catalog.hpp"
#include "ckylab/cky.hpp"
#include "ckylab/verify.hpp"
#include "support.hpp"

using namespace ckylab;
using testing_support::random_vector;

namespace {

struct Solved {
  FamilyInstance inst;
  KindDims dims;
};

const std::vector<Solved>& solved_representatives() {
  static const std::vector<Solved> cache = [] {
    std::vector<Solved> out;
    for (auto& inst : testing_support::representative_instances()) {
      KindDims d = solve_all_kinds(inst.algebra, 2);
      out.push_back({std::move(inst), std::move(d)});
    }
    return out;
  }();
  return cache;
}

int nullity(const Eigen::MatrixXd& m) { return static_cast<int>(m.cols()) - numerical_rank(m, 1e-10); }

}  // namespace

TEST(Assemble, AbelianHasFullNullspace) {
  const auto a = build_family("abelian").algebra;
  EXPECT_EQ(nullity(assemble_cky_system(a, 2)), 10);
  EXPECT_EQ(nullity(assemble_cky_system(a, 2, Formulation::symmetrized)), 10);
}

TEST(Assemble, FormulationsAgreeOnG12) {
  const auto a = build_family("grs", {{"r", 1.0}, {"s", 2.0}}).algebra;
  const Eigen::MatrixXd gen = assemble_cky_system(a, 2);
  const Eigen::MatrixXd sym = assemble_cky_system(a, 2, Formulation::symmetrized);
  EXPECT_EQ(numerical_rank(gen, 1e-10), numerical_rank(sym, 1e-10));
  EXPECT_EQ(nullity(gen), 1);
  EXPECT_EQ(nullity(assemble_cky_system(build_family("h5").algebra, 2)), 1);
}

TEST(Assemble, Errors) {
  const auto a = build_family("h5").algebra;
  EXPECT_THROW(assemble_cky_system(a, 3, Formulation::symmetrized), InputError);
  EXPECT_THROW(assemble_cky_system(a, 0), InputError);
  EXPECT_THROW(assemble_cky_system(a, 5), InputError);
  EXPECT_THROW(solve_form_space(a, 6, FormKind::cky), InputError);
  EXPECT_THROW(parse_form_kind("conformal"), InputError);
  EXPECT_EQ(parse_form_kind("star-ky"), FormKind::star_ky);
  EXPECT_EQ(to_string(FormKind::star_ky), "star-ky");
}

TEST(Solve, ExtensionFamilyDimensions) {
  for (const auto& id : extension_family_ids()) {
    for (const auto& params : sweep_params(id)) {
      const auto inst = build_family(id, params);
      const KindDims d = solve_all_kinds(inst.algebra, 2);
      const std::string where = testing_support::label(id, params);
      EXPECT_EQ(d.cky.dimension(), 1) << where;
      EXPECT_EQ(d.ky.dimension(), 0) << where;
      EXPECT_EQ(d.star_ky.dimension(), 1) << where;
      EXPECT_EQ(d.parallel.dimension(), 0) << where;
      EXPECT_LE(projection_residual(inst.algebra, d.cky, *inst.reference_form), 1e-8) << where;
    }
  }
}

TEST(Solve, GrsDimensions) {
  for (const auto& [r, s] : grs_sweep()) {
    const auto inst = build_family("grs", {{"r", r}, {"s", s}});
    for (int p : {2, 3}) {
      const KindDims d = solve_all_kinds(inst.algebra, p);
      EXPECT_EQ(d.cky.dimension(), 1) << r << " " << s << " p=" << p;
      EXPECT_EQ(d.ky.dimension(), 0) << r << " " << s << " p=" << p;
      EXPECT_EQ(d.star_ky.dimension(), 0) << r << " " << s << " p=" << p;
    }
    const SolutionSpace cky2 = solve_form_space(inst.algebra, 2, FormKind::cky);
    EXPECT_LE(projection_residual(inst.algebra, cky2, *inst.reference_form), 1e-8);
  }
}

TEST(Solve, TabulatedRegimesMatchReference) {
  for (const auto& [id, params] : std::vector<std::pair<std::string, ParamMap<double>>>{
           {"L59", {{"r", 1.0}}}, {"L59", {{"r", 2.0}}}, {"su2xR2", {{"r", 0.5}, {"s", 1.5}}}, {"sl2xR2", {}}}) {
    const auto inst = build_family(id, params);
    const SolutionSpace cky2 = solve_form_space(inst.algebra, 2, FormKind::cky);
    ASSERT_EQ(cky2.dimension(), 1) << id;
    EXPECT_LE(projection_residual(inst.algebra, cky2, *inst.reference_form), 1e-8) << id;
    EXPECT_EQ(solve_form_space(inst.algebra, 3, FormKind::cky).dimension(), 1) << id;
  }
}

TEST(Solve, OtherDegrees) {
  // Every left-invariant form on the abelian algebra is parallel.
  const auto ab = build_family("abelian").algebra;
  EXPECT_EQ(solve_form_space(ab, 1, FormKind::cky).dimension(), 5);
  EXPECT_EQ(solve_form_space(ab, 4, FormKind::parallel).dimension(), 5);
  EXPECT_EQ(solve_form_space(ab, 3, FormKind::ky).dimension(), 10);
}

TEST(SolutionSpace, BasisElementsSolveTheSystem) {
  for (const auto& s : solved_representatives()) {
    for (const SolutionSpace* sp : {&s.dims.cky, &s.dims.ky, &s.dims.star_ky, &s.dims.parallel}) {
      for (const PForm& f : sp->basis) {
        EXPECT_LE(kind_residual(s.inst.algebra, f, sp->kind), 1e-9) << s.inst.id << " " << to_string(sp->kind);
      }
    }
  }
}

TEST(SolutionSpace, Containments) {
  for (const auto& s : solved_representatives()) {
    const auto& a = s.inst.algebra;
    EXPECT_LE(containment_residual(a, s.dims.parallel, s.dims.ky), 1e-9) << s.inst.id;
    EXPECT_LE(containment_residual(a, s.dims.ky, s.dims.cky), 1e-9) << s.inst.id;
    EXPECT_LE(containment_residual(a, s.dims.star_ky, s.dims.cky), 1e-9) << s.inst.id;
  }
}

TEST(SolutionSpace, OrthonormalInFormMetric) {
  for (const auto& s : solved_representatives()) {
    const auto& b = s.dims.cky.basis;
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        EXPECT_NEAR(inner_product(s.inst.algebra, b[i], b[j]), i == j ? 1.0 : 0.0, 1e-12) << s.inst.id;
      }
    }
  }
}

TEST(SolutionSpace, CanonicalBasisIsDeterministic) {
  for (const auto& s : solved_representatives()) {
    const SolutionSpace again = solve_form_space(s.inst.algebra, 2, FormKind::cky);
    ASSERT_EQ(again.dimension(), s.dims.cky.dimension());
    for (int i = 0; i < again.dimension(); ++i) {
      EXPECT_EQ(again.basis[i].coeffs(), s.dims.cky.basis[i].coeffs()) << s.inst.id;
    }
  }
}

TEST(SolutionSpace, SignRuleMakesFirstCoefficientPositive) {
  for (const auto& s : solved_representatives()) {
    for (const PForm& f : s.dims.cky.basis) {
      const double scale = f.max_abs();
      for (Eigen::Index i = 0; i < f.coeffs().size(); ++i) {
        if (std::abs(f.coeffs()(i)) > 1e-9 * scale) {
          EXPECT_GT(f.coeffs()(i), 0.0) << s.inst.id;
          break;
        }
      }
    }
  }
}

TEST(SolutionSpace, BasisInvariantUnderScalingTheMetric) {
  // A homothety changes the normalisation, not the span.
  const auto inst = build_family("g4");
  StructureData<double> data = inst.algebra.data();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) data.gram(i, j) *= 3.0;
  }
  const MetricLieAlgebra scaled(data);
  const SolutionSpace a = solve_form_space(inst.algebra, 2, FormKind::cky);
  const SolutionSpace b = solve_form_space(scaled, 2, FormKind::cky);
  ASSERT_EQ(b.dimension(), 1);
  EXPECT_LE(projection_residual(scaled, b, a.basis[0]), 1e-10);
}

TEST(Formulation, SubspaceAngle) {
  for (const auto& s : solved_representatives()) {
    const auto& a = s.inst.algebra;
    const Eigen::MatrixXd gen = assemble_cky_system(a, 2);
    const Eigen::MatrixXd sym = assemble_cky_system(a, 2, Formulation::symmetrized);
    const Eigen::MatrixXd to_frame = pullback_matrix(orthonormal_frame(a.gram()), 2);
    const Eigen::MatrixXd from_frame = to_frame.inverse();
    const NullspaceResult ng = nullspace(gen * from_frame, 1e-10);
    const NullspaceResult ns = nullspace(sym * from_frame, 1e-10);
    ASSERT_EQ(ng.basis.cols(), ns.basis.cols()) << s.inst.id;
    if (ng.basis.cols() == 0) continue;
    const Eigen::MatrixXd r = ng.basis - ns.basis * (ns.basis.transpose() * ng.basis);
    EXPECT_LE(Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()(0), 1e-8) << s.inst.id;
  }
}

TEST(HodgeTransport, CkyAndKyMapToCkyAndStarKy) {
  for (const auto& s : solved_representatives()) {
    const auto& a = s.inst.algebra;
    const int n = a.dim();
    const SolutionSpace cky3 = solve_form_space(a, n - 2, FormKind::cky);
    const SolutionSpace star3 = solve_form_space(a, n - 2, FormKind::star_ky);
    for (const PForm& f : s.dims.cky.basis) {
      EXPECT_LE(cky_residual(a, hodge_star(a, f)), 1e-9) << s.inst.id;
      EXPECT_LE(projection_residual(a, cky3, hodge_star(a, f)), 1e-8) << s.inst.id;
    }
    for (const PForm& f : s.dims.ky.basis) {
      EXPECT_LE(projection_residual(a, star3, hodge_star(a, f)), 1e-8) << s.inst.id;
    }
    EXPECT_EQ(cky3.dimension(), s.dims.cky.dimension()) << s.inst.id;
  }
}

TEST(Classification, StrictnessDichotomy) {
  for (const auto& s : solved_representatives()) {
    const auto& a = s.inst.algebra;
    for (const PForm& f : s.dims.cky.basis) {
      const CKYClassification cl = extract_associated_vector(a, f);
      if (!cl.is_strict) {
        EXPECT_LE(projection_residual(a, s.dims.ky, f), 1e-8) << s.inst.id;
      } else {
        EXPECT_EQ(a.dim() % 2, 1) << s.inst.id;
        EXPECT_EQ(cl.restricted_rank, a.dim() - 1) << s.inst.id;
        EXPECT_LE(cl.t_xi_residual, 1e-10) << s.inst.id;
        EXPECT_GT(cl.derived_projection, 1e-6) << s.inst.id;
      }
    }
  }
}

TEST(Classification, H5FromTableOne) {
  const auto ing = extension_ingredients<double>("h5", {});
  const auto ext = central_extension(MetricLieAlgebra(ing.h), to_eigen(ing.s), 1.0);
  const CKYClassification cl = extract_associated_vector(ext.algebra, *ext.reference_form);
  EXPECT_TRUE(cl.is_strict);
  EXPECT_TRUE(cl.xi_in_center);
  EXPECT_TRUE(cl.closed);
  EXPECT_FALSE(cl.coclosed);
  EXPECT_NEAR(cl.xi_norm, 1.0, 1e-13);
  EXPECT_LE((cl.xi - Vec::Unit(5, 4)).norm(), 1e-13);
}

TEST(Classification, AbelianFormsAreParallel) {
  const auto a = build_family("abelian").algebra;
  const CKYClassification cl = extract_associated_vector(a, PForm(5, 2, random_vector(10)));
  EXPECT_FALSE(cl.is_strict);
  EXPECT_TRUE(cl.parallel);
  EXPECT_EQ(cl.theta.max_abs(), 0.0);
}

TEST(Classification, ZeroFormIsParallelNonStrict) {
  const auto a = build_family("h5").algebra;
  const CKYClassification cl = extract_associated_vector(a, PForm(5, 2));
  EXPECT_FALSE(cl.is_strict);
  EXPECT_TRUE(cl.parallel);
}

TEST(Classification, G12) {
  const auto inst = build_family("grs", {{"r", 1.0}, {"s", 2.0}});
  const CKYClassification cl = extract_associated_vector(inst.algebra, *inst.reference_form);
  EXPECT_TRUE(cl.is_strict);
  EXPECT_TRUE(cl.xi_perp_center);
  EXPECT_FALSE(cl.xi_in_center);
  EXPECT_FALSE(cl.closed);
  EXPECT_NEAR(cl.xi_norm, 1.0, 1e-12);
}

TEST(Classification, TabulatedFlags) {
  for (const auto& s : solved_representatives()) {
    const auto& flags = s.inst.expected_flags;
    if (flags.count("no_strict")) {
      EXPECT_EQ(strict_count(s.inst.algebra, s.dims.cky), 0) << s.inst.id;
      continue;
    }
    const CKYClassification cl = extract_associated_vector(s.inst.algebra, *s.inst.reference_form);
    for (const auto& [name, value] : flags) {
      if (name == "strict") { EXPECT_EQ(cl.is_strict, value) << s.inst.id; }
      if (name == "closed") { EXPECT_EQ(cl.closed, value) << s.inst.id; }
      if (name == "xi_in_center") { EXPECT_EQ(cl.xi_in_center, value) << s.inst.id; }
      if (name == "xi_perp_center") { EXPECT_EQ(cl.xi_perp_center, value) << s.inst.id; }
    }
  }
}

TEST(Classification, RejectsNonCkyForm) {
  const auto a = build_family("h5").algebra;
  EXPECT_THROW(extract_associated_vector(a, PForm::monomial(5, {0, 4})), PreconditionError);
  EXPECT_THROW(extract_associated_vector(a, PForm::monomial(5, {0, 1, 2})), InputError);
}

TEST(CentralObstruction, ThreeDimensionalCenter) {
  for (const auto& params : dim3center_draws()) {
    const auto inst = build_family("dim3center", params);
    ASSERT_EQ(center(inst.algebra).cols(), 3);
    const SolutionSpace cky = solve_form_space(inst.algebra, 2, FormKind::cky);
    EXPECT_EQ(strict_count(inst.algebra, cky), 0) << testing_support::label("dim3center", params);
    for (const PForm& f : cky.basis) {
      EXPECT_FALSE(extract_associated_vector(inst.algebra, f).is_strict);
    }
  }
}

TEST(Identities, G12Passes) {
  for (const auto& [r, s] : grs_sweep()) {
    const auto inst = build_family("grs", {{"r", r}, {"s", s}});
    const auto& a = inst.algebra;
    const CKYClassification cl = extract_associated_vector(a, *inst.reference_form);
    const IdentityReport rep = structural_identity_report(a, to_endomorphism(a, *inst.reference_form), cl.xi);
    EXPECT_TRUE(rep.passed) << r << " " << s;
    EXPECT_LE(rep.max_residual, 1e-10) << r << " " << s;
    EXPECT_GE(rep.checks.size(), 9u);
  }
}

TEST(Identities, PerturbationIsDetected) {
  const auto inst = build_family("grs", {{"r", 1.0}, {"s", 3.0}});
  const auto& a = inst.algebra;
  const CKYClassification cl = extract_associated_vector(a, *inst.reference_form);
  Endo t = to_endomorphism(a, *inst.reference_form);
  t(1, 2) += 1e-3;
  const IdentityReport rep = structural_identity_report(a, t, cl.xi);
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.max_residual, 1e-4);
}

TEST(Identities, AbelianFails) {
  const auto a = build_family("abelian").algebra;
  Endo t = Endo::Zero(5, 5);
  t(0, 1) = 1.0;
  t(1, 0) = -1.0;
  const IdentityReport rep = structural_identity_report(a, t, Vec::Zero(5));
  EXPECT_FALSE(rep.passed);
}

TEST(Identities, NeedsTwoDimensionalCenter) {
  const auto a = build_family("h5").algebra;
  EXPECT_THROW(structural_identity_report(a, Endo::Zero(5, 5), Vec::Unit(5, 4)), PreconditionError);
}
