#include <gtest/gtest.h>

#include "ckylab/catalog.hpp"
#include "ckylab/cky.hpp"
#include "ckylab/forms.hpp"
#include "support.hpp"

using namespace ckylab;
using testing_support::random_vector;

namespace {

PForm random_form(int n, int p) { return PForm(n, p, random_vector(static_cast<int>(binomial(n, p)))); }

double max_diff(const PForm& a, const PForm& b) { return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff(); }

/// Vector dual to the trace form x -> tr ad_x; zero exactly when unimodular.
Vec mean_curvature(const MetricLieAlgebra& a) {
  Vec tr(a.dim());
  for (int i = 0; i < a.dim(); ++i) tr(i) = a.ad_basis(i).trace();
  return a.gram_inverse() * tr;
}

}  // namespace

TEST(Wedge, MonomialExamples) {
  const PForm e1f1 = PForm::monomial(5, {0, 1});
  const PForm e2f2 = PForm::monomial(5, {2, 3});
  const PForm four = wedge(e1f1, e2f2);
  EXPECT_EQ(four.degree(), 4);
  EXPECT_EQ(four.on_basis({0, 1, 2, 3}), 1.0);
  EXPECT_EQ(four.on_basis({1, 0, 2, 3}), -1.0);
  EXPECT_EQ(four.max_abs(), 1.0);
  EXPECT_EQ(PForm::monomial(5, {1, 0}, 2.0).on_basis({0, 1}), -2.0);
  EXPECT_EQ(PForm::monomial(5, {1, 1}).max_abs(), 0.0);
}

TEST(Wedge, GradedCommutativeAndAssociative) {
  for (int p = 0; p <= 3; ++p) {
    for (int q = 0; p + q <= 5; ++q) {
      const PForm a = random_form(5, p), b = random_form(5, q);
      const double sign = (p * q) % 2 == 0 ? 1.0 : -1.0;
      EXPECT_LE(max_diff(wedge(a, b), sign * wedge(b, a)), 1e-12) << p << " " << q;
      if (p + q + 1 <= 5) {
        const PForm c = random_form(5, 1);
        EXPECT_LE(max_diff(wedge(wedge(a, b), c), wedge(a, wedge(b, c))), 1e-12);
      }
    }
  }
}

TEST(Wedge, OverflowGivesZeroTopForm) {
  const PForm w = wedge(random_form(5, 3), random_form(5, 3));
  EXPECT_EQ(w.degree(), 5);
  EXPECT_EQ(w.max_abs(), 0.0);
}

TEST(Wedge, EvaluationIsDeterminantExpansion) {
  const PForm a = random_form(5, 1), b = random_form(5, 1);
  const Eigen::MatrixXd v = testing_support::random_matrix(5, 2);
  const double expected = a.coeffs().dot(v.col(0)) * b.coeffs().dot(v.col(1)) -
                          a.coeffs().dot(v.col(1)) * b.coeffs().dot(v.col(0));
  EXPECT_NEAR(wedge(a, b).evaluate(v), expected, 1e-12);
}

TEST(Interior, Examples) {
  // iota_x (x* ^ y*) = y* in an orthonormal basis.
  const PForm xy = PForm::monomial(5, {3, 4});
  const PForm got = interior(Vec::Unit(5, 3), xy);
  EXPECT_LE(max_diff(got, PForm::monomial(5, {4})), 0.0);
  EXPECT_LE(max_diff(interior(Vec::Unit(5, 4), xy), PForm::monomial(5, {3}, -1.0)), 0.0);
}

TEST(Interior, Antiderivation) {
  for (int p = 1; p <= 3; ++p) {
    for (int q = 1; p + q <= 5; ++q) {
      const PForm a = random_form(5, p), b = random_form(5, q);
      const Vec x = random_vector(5);
      const double sign = p % 2 == 0 ? 1.0 : -1.0;
      const PForm lhs = interior(x, wedge(a, b));
      const PForm rhs = wedge(interior(x, a), b) + sign * wedge(a, interior(x, b));
      EXPECT_LE(max_diff(lhs, rhs), 1e-12);
      EXPECT_LE(interior(x, interior(x, wedge(a, b))).max_abs(), 1e-12);
    }
  }
}

TEST(Musical, FlatOfXi) {
  // xi is a unit vector orthogonal to the rest of the basis, so xi-flat is the
  // dual covector with value 1 on xi.
  for (const auto& [r, s] : grs_sweep()) {
    const auto a = build_family("grs", {{"r", r}, {"s", s}}).algebra;
    const PForm theta = flat(a, a.basis_vector(0));
    EXPECT_LE(max_diff(theta, PForm::monomial(5, {0})), 0.0);
  }
}

TEST(Musical, FlatSharpRoundTrip) {
  for (const auto& inst : testing_support::representative_instances()) {
    const PForm theta = random_form(inst.algebra.dim(), 1);
    EXPECT_LE(max_diff(flat(inst.algebra, sharp(inst.algebra, theta)), theta), 1e-12) << inst.id;
  }
}

TEST(ExteriorDerivative, GrsCheckValue) {
  for (const auto& [r, s] : grs_sweep()) {
    const auto inst = build_family("grs", {{"r", r}, {"s", s}});
    const PForm dw = exterior_derivative(inst.algebra, *inst.reference_form);
    // (x, z2, xi) = basis indices (3, 2, 0).
    EXPECT_NEAR(dw.on_basis({3, 2, 0}), -6.0 * r / s, 1e-9) << r << " " << s;
  }
}

TEST(ExteriorDerivative, ExtensionFormsAreClosed) {
  for (const auto& id : extension_family_ids()) {
    const auto inst = build_family(id);
    EXPECT_LE(exterior_derivative(inst.algebra, *inst.reference_form).max_abs(), 1e-12) << id;
  }
  // h5 in the basis {e1, f1, e2, f2, xi} with w = a1 e^1 ^ f^1 + a2 e^2 ^ f^2.
  const auto ing = extension_ingredients<double>("h5", {});
  const auto ext = central_extension(MetricLieAlgebra(ing.h), to_eigen(ing.s), 1.0);
  EXPECT_LE(exterior_derivative(ext.algebra, *ext.reference_form).max_abs(), 1e-14);
}

TEST(ExteriorDerivative, AbelianIsZero) {
  const auto a = build_family("abelian").algebra;
  for (int p = 0; p < 5; ++p) EXPECT_EQ(exterior_derivative(a, random_form(5, p)).max_abs(), 0.0);
}

TEST(ExteriorDerivative, SquaresToZero) {
  for (const auto& [id, params] : testing_support::all_samples()) {
    const auto a = build_family(id, params).algebra;
    for (int p = 0; p + 2 <= a.dim(); ++p) {
      const PForm eta = random_form(a.dim(), p);
      const double res = exterior_derivative(a, exterior_derivative(a, eta)).max_abs();
      EXPECT_LE(res, 1e-10) << testing_support::label(id, params) << " p=" << p;
    }
  }
}

TEST(Codifferential, AbelianIsZero) {
  const auto a = build_family("abelian").algebra;
  for (int p = 1; p <= 5; ++p) EXPECT_EQ(codifferential(a, random_form(5, p)).max_abs(), 0.0);
}

TEST(Codifferential, H5ThetaHasUnitXiComponent) {
  // Table 1 presentation: d* w = -(n - 1) xi-flat = -4 xi-flat.
  const auto ing = extension_ingredients<double>("h5", {});
  const auto ext = central_extension(MetricLieAlgebra(ing.h), to_eigen(ing.s), 1.0);
  const PForm expected = -4.0 * flat(ext.algebra, ext.algebra.basis_vector(4));
  EXPECT_LE(max_diff(codifferential(ext.algebra, *ext.reference_form), expected), 1e-13);
}

TEST(Codifferential, G12MatchesBothRoutes) {
  const auto inst = build_family("grs", {{"r", 1.0}, {"s", 2.0}});
  const PForm expected = -4.0 * flat(inst.algebra, inst.algebra.basis_vector(0));
  EXPECT_LE(max_diff(codifferential(inst.algebra, *inst.reference_form), expected), 1e-12);
  EXPECT_LE(max_diff(codifferential_via_hodge(inst.algebra, *inst.reference_form), expected), 1e-12);
}

TEST(Codifferential, RoutesAgreeOnRandomForms) {
  for (const auto& inst : testing_support::representative_instances()) {
    const int n = inst.algebra.dim();
    for (int p = 1; p <= n; ++p) {
      const PForm eta = random_form(n, p);
      EXPECT_LE(max_diff(codifferential(inst.algebra, eta), codifferential_via_hodge(inst.algebra, eta)), 1e-10)
          << inst.id << " p=" << p;
    }
  }
}

TEST(Codifferential, AdjointOnUnimodular) {
  for (const auto& inst : testing_support::representative_instances()) {
    const auto& a = inst.algebra;
    if (!is_unimodular(a)) continue;
    for (int p = 0; p < a.dim(); ++p) {
      const PForm alpha = random_form(a.dim(), p), beta = random_form(a.dim(), p + 1);
      const double lhs = inner_product(a, exterior_derivative(a, alpha), beta);
      const double rhs = inner_product(a, alpha, codifferential(a, beta));
      EXPECT_NEAR(lhs, rhs, 1e-9) << inst.id << " p=" << p;
    }
  }
}

TEST(Codifferential, AdjointUpToTraceTerm) {
  // In general the algebraic adjoint of d is d* - iota_H with H dual to x -> tr ad_x.
  bool saw_non_unimodular = false;
  for (const auto& inst : testing_support::representative_instances()) {
    const auto& a = inst.algebra;
    const Vec h = mean_curvature(a);
    saw_non_unimodular |= h.norm() > 1e-6;
    for (int p = 0; p < a.dim(); ++p) {
      const PForm alpha = random_form(a.dim(), p), beta = random_form(a.dim(), p + 1);
      const double lhs = inner_product(a, exterior_derivative(a, alpha), beta);
      const double rhs = inner_product(a, alpha, codifferential(a, beta) - interior(h, beta));
      EXPECT_NEAR(lhs, rhs, 1e-9) << inst.id << " p=" << p;
    }
  }
  EXPECT_TRUE(saw_non_unimodular);
}

TEST(Hodge, UnitAndVolume) {
  for (const auto& inst : testing_support::representative_instances()) {
    const auto& a = inst.algebra;
    const PForm vol = volume_form(a);
    EXPECT_NEAR(vol.coeffs()(0), std::sqrt(a.gram().determinant()), 1e-12) << inst.id;
  }
}

TEST(Hodge, OrthonormalMonomial) {
  const auto a = build_family("abelian").algebra;
  EXPECT_LE(max_diff(hodge_star(a, PForm::monomial(5, {0, 1})), PForm::monomial(5, {2, 3, 4})), 0.0);
  EXPECT_LE(max_diff(hodge_star(a, PForm::monomial(5, {1, 3})), PForm::monomial(5, {0, 2, 4}, -1.0)), 0.0);
}

TEST(Hodge, DoubleStarSignLaw) {
  for (const auto& inst : testing_support::representative_instances()) {
    const int n = inst.algebra.dim();
    for (int p = 0; p <= n; ++p) {
      const PForm eta = random_form(n, p);
      const double sign = (p * (n - p)) % 2 == 0 ? 1.0 : -1.0;
      EXPECT_LE(max_diff(hodge_star(inst.algebra, hodge_star(inst.algebra, eta)), sign * eta), 1e-12)
          << inst.id << " p=" << p;
    }
  }
}

TEST(Hodge, InnerProductAgainstVolume) {
  for (const auto& inst : testing_support::representative_instances()) {
    const auto& a = inst.algebra;
    const PForm vol = volume_form(a);
    for (int p = 0; p <= a.dim(); ++p) {
      const PForm alpha = random_form(a.dim(), p), beta = random_form(a.dim(), p);
      const PForm lhs = inner_product(a, alpha, beta) * vol;
      EXPECT_LE(max_diff(lhs, wedge(alpha, hodge_star(a, beta))), 1e-10) << inst.id << " p=" << p;
    }
  }
}

TEST(Hodge, StarOfGrsFormIsCky3) {
  const auto inst = build_family("grs", {{"r", 1.0}, {"s", 2.0}});
  const PForm star = hodge_star(inst.algebra, *inst.reference_form);
  EXPECT_EQ(star.degree(), 3);
  EXPECT_LE(cky_residual(inst.algebra, star), 1e-9);
}

TEST(Endomorphism, RoundTripAndConvention) {
  const auto inst = build_family("g6");
  const auto& a = inst.algebra;
  const PForm w = *inst.reference_form;
  const Endo t = to_endomorphism(a, w);
  EXPECT_LE(max_diff(from_endomorphism(a, t), w), 1e-12);
  const Vec x = random_vector(5), y = random_vector(5);
  Eigen::MatrixXd xy(5, 2);
  xy << x, y;
  EXPECT_NEAR(w.evaluate(xy), (t * x).dot(a.gram() * y), 1e-12);
}
