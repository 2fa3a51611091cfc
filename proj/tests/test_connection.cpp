#include <gtest/gtest.h>

#include "ckylab/catalog.hpp"
#include "ckylab/connection.hpp"
#include "ckylab/forms.hpp"
#include "oracle/exact_cky.hpp"
#include "support.hpp"

using namespace ckylab;
using testing_support::random_vector;

namespace {

double inner(const MetricLieAlgebra& a, const Vec& x, const Vec& y) { return x.dot(a.gram() * y); }

Eigen::MatrixXd random_orthogonal(int n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(testing_support::random_matrix(n, n));
  return qr.householderQ();
}

}  // namespace

TEST(LeviCivita, AbelianIsFlat) {
  const Connection conn = levi_civita(build_family("abelian").algebra);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(conn.nabla(i).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LeviCivita, XiIsGeodesicOnGrs) {
  for (const auto& [r, s] : grs_sweep()) {
    const auto a = build_family("grs", {{"r", r}, {"s", s}}).algebra;
    EXPECT_LE(levi_civita(a).nabla(0).col(0).norm(), 1e-14);
  }
}

TEST(LeviCivita, G11HandValue) {
  const auto a = build_family("grs", {{"r", 1.0}, {"s", 1.0}}).algebra;
  Vec expected = Vec::Zero(5);
  expected(0) = 0.5;
  EXPECT_LE((levi_civita(a).nabla(3).col(4) - expected).norm(), 1e-15);
}

TEST(LeviCivita, KoszulReconstruction) {
  for (const auto& inst : testing_support::representative_instances()) {
    const auto& a = inst.algebra;
    const Connection conn = levi_civita(a);
    const int n = a.dim();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const Vec ei = a.basis_vector(i), ej = a.basis_vector(j), ek = a.basis_vector(k);
          const double rhs = inner(a, a.bracket(ei, ej), ek) - inner(a, a.bracket(ej, ek), ei) +
                             inner(a, a.bracket(ek, ei), ej);
          worst = std::max(worst, std::abs(2.0 * inner(a, conn.nabla(i).col(j), ek) - rhs));
        }
      }
    }
    EXPECT_LE(worst, 1e-12) << inst.id;
    EXPECT_LE(conn.metric_residual(), 1e-12) << inst.id;
    EXPECT_LE(conn.torsion_residual(), 1e-12) << inst.id;
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXd gn = a.gram() * conn.nabla(i);
      EXPECT_LE((gn + gn.transpose()).cwiseAbs().maxCoeff(), 1e-12) << inst.id;
    }
  }
}

TEST(LeviCivita, MatchesExactKoszul) {
  using exact::Rational;
  for (const auto& id : extension_family_ids()) {
    const ParamMap<double> params = sweep_params(id).back();
    const auto data = family_structure<Rational>(id, testing_support::to_rational(params));
    const auto nab = oracle::koszul(data.structure);
    const Connection conn = levi_civita(MetricLieAlgebra(family_structure<double>(id, params).structure));
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) {
          worst = std::max(worst, std::abs(conn.nabla(i)(k, j) - static_cast<double>(nab[i][j][k])));
        }
      }
    }
    EXPECT_LE(worst, 1e-12) << id;
  }
}

TEST(LeviCivita, AlongIsLinear) {
  const auto a = build_family("g6").algebra;
  const Connection conn = levi_civita(a);
  const Vec x = random_vector(5);
  Endo expected = Endo::Zero(5, 5);
  for (int i = 0; i < 5; ++i) expected += x(i) * conn.nabla(i);
  EXPECT_LE((conn.along(x) - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CovariantDerivative, AbelianVanishes) {
  const Connection conn = levi_civita(build_family("abelian").algebra);
  const Endo t = testing_support::random_matrix(5, 5);
  EXPECT_EQ(covariant_derivative(conn, random_vector(5), t).cwiseAbs().maxCoeff(), 0.0);
}

TEST(CovariantDerivative, ParallelTensorOnEuclideanFactor) {
  // R x e(2) with S e1 = a1 f1, S e2 = a2 f2 is parallel.
  for (const auto& params : sweep_params("g3")) {
    const auto ing = extension_ingredients<double>("g3", params);
    const MetricLieAlgebra h(ing.h);
    const Connection conn = levi_civita(h);
    const Endo s = to_eigen(ing.s);
    for (int i = 0; i < 4; ++i) {
      EXPECT_LE(covariant_derivative(conn, h.basis_vector(i), s).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(CovariantDerivative, CommutatorExpansion) {
  const auto inst = build_family("grs", {{"r", 1.0}, {"s", 2.0}});
  const auto& a = inst.algebra;
  const Connection conn = levi_civita(a);
  const Endo t = to_endomorphism(a, *inst.reference_form);
  const Endo got = covariant_derivative(conn, a.basis_vector(0), t);
  const Endo direct = conn.nabla(0) * t - t * conn.nabla(0);
  EXPECT_GT(got.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_LE((got - direct).cwiseAbs().maxCoeff(), 1e-14);
  // A G-skew tensor has a G-skew derivative.
  const Eigen::MatrixXd g = a.gram() * got;
  EXPECT_LE((g + g.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Curvature, AbelianIsFlat) {
  const Connection conn = levi_civita(build_family("abelian").algebra);
  EXPECT_EQ(curvature(conn, random_vector(5), random_vector(5)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Curvature, G11MatchesExactFormula) {
  using exact::Rational;
  using oracle::Structure;
  const auto data = family_structure<Rational>("grs", {{"r", Rational(1)}, {"s", Rational(1)}});
  const Structure& s = data.structure;
  const auto nab = oracle::koszul(s);
  // Exact R(e_i,e_j) e_k = nabla_{[e_i,e_j]} e_k - nabla_i nabla_j e_k + nabla_j nabla_i e_k.
  auto apply = [&](int i, const std::vector<Rational>& v) {
    std::vector<Rational> out(5, Rational(0));
    for (int k = 0; k < 5; ++k) {
      for (int m = 0; m < 5; ++m) out[m] += v[k] * nab[i][k][m];
    }
    return out;
  };
  const Connection conn = levi_civita(MetricLieAlgebra(family_structure<double>("grs", {{"r", 1.0}, {"s", 1.0}}).structure));
  double worst = 0.0, largest = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const Endo r = curvature(conn, conn.algebra().basis_vector(i), conn.algebra().basis_vector(j));
      for (int k = 0; k < 5; ++k) {
        std::vector<Rational> v(5, Rational(0));
        for (int b = 0; b < 5; ++b) {
          const Rational cb = s.c(i, j, b);
          for (int m = 0; m < 5; ++m) v[m] += cb * nab[b][k][m];
        }
        const auto ij = apply(i, nab[j][k]);
        const auto ji = apply(j, nab[i][k]);
        for (int m = 0; m < 5; ++m) {
          const double exact = static_cast<double>(v[m] - ij[m] + ji[m]);
          worst = std::max(worst, std::abs(r(m, k) - exact));
          largest = std::max(largest, std::abs(exact));
        }
      }
    }
  }
  EXPECT_GT(largest, 0.1);
  EXPECT_LE(worst, 1e-14);
}

TEST(Curvature, Symmetries) {
  for (const auto& inst : testing_support::representative_instances()) {
    const auto& a = inst.algebra;
    const Connection conn = levi_civita(a);
    const int n = a.dim();
    const Vec x = random_vector(n), y = random_vector(n), z = random_vector(n), w = random_vector(n);
    const Endo rxy = curvature(conn, x, y);
    EXPECT_LE((rxy + curvature(conn, y, x)).cwiseAbs().maxCoeff(), 1e-12) << inst.id;
    const Eigen::MatrixXd g = a.gram() * rxy;
    EXPECT_LE((g + g.transpose()).cwiseAbs().maxCoeff(), 1e-12) << inst.id;
    const Vec bianchi = rxy * z + curvature(conn, y, z) * x + curvature(conn, z, x) * y;
    EXPECT_LE(bianchi.norm(), 1e-9) << inst.id;
    const double pair = inner(a, rxy * z, w) - inner(a, curvature(conn, z, w) * x, y);
    EXPECT_LE(std::abs(pair), 1e-9) << inst.id;
  }
}

TEST(Holonomy, Examples) {
  EXPECT_EQ(holonomy_algebra(build_family("abelian").algebra).dimension, 0);
  const std::vector<std::pair<std::string, ParamMap<double>>> cases = {
      {"L59", {{"r", 1.0}}},
      {"L59", {{"r", 2.0}}},
      {"grs", {{"r", 1.0}, {"s", 2.0}}},
      {"grs", {{"r", 2.0}, {"s", 1.0}}},
      {"g3", {{"t", 1.0}, {"a1", 1.0}, {"a2", 1.0}}},
  };
  for (const auto& [id, params] : cases) {
    const HolonomyReport rep = holonomy_algebra(build_family(id, params).algebra);
    EXPECT_EQ(rep.dimension, 10) << testing_support::label(id, params);
    EXPECT_TRUE(rep.converged);
  }
}

TEST(Holonomy, BasisIsSkewAndIndependent) {
  const auto a = build_family("g6").algebra;
  const HolonomyReport rep = holonomy_algebra(a);
  ASSERT_EQ(static_cast<int>(rep.basis.size()), rep.dimension);
  Eigen::MatrixXd stacked(25, rep.dimension);
  for (int i = 0; i < rep.dimension; ++i) {
    const Eigen::MatrixXd g = a.gram() * rep.basis[i];
    EXPECT_LE((g + g.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    stacked.col(i) = Eigen::Map<const Eigen::VectorXd>(rep.basis[i].data(), 25);
  }
  EXPECT_EQ(numerical_rank(stacked, 1e-10), rep.dimension);
}

TEST(Holonomy, InvariantUnderOrthonormalChange) {
  for (const auto& inst : testing_support::representative_instances()) {
    const auto& a = inst.algebra;
    // Move to a G-orthonormal basis, then rotate it.
    const Eigen::MatrixXd frame = orthonormal_frame(a.gram());
    const Eigen::MatrixXd p = frame * random_orthogonal(a.dim());
    const MetricLieAlgebra b(a.data().change_basis(p, Eigen::MatrixXd(p.inverse())));
    EXPECT_LE((b.gram() - Eigen::MatrixXd::Identity(a.dim(), a.dim())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(holonomy_algebra(b).dimension, holonomy_algebra(a).dimension) << inst.id;
  }
}
