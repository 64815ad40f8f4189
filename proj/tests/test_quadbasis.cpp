#include "hdg/basis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hdg;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// closed form over {r, s >= 0, r + s <= 1}
double simplex_monomial(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

double integrate(const QuadratureRule& q, int a, int b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q.weights[i] * std::pow(q.points[i][0], a) * std::pow(q.points[i][1], b);
  return sum;
}

} // namespace

TEST(Quadrature, CentroidRule) {
  const QuadratureRule q = make_quadrature(1);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_NEAR(q.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(q.points[0][0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(q.points[0][1], 1.0 / 3.0, 1e-15);
}

TEST(Quadrature, SecondMoment) {
  EXPECT_NEAR(integrate(make_quadrature(2), 2, 0), 1.0 / 12.0, 1e-15);
}

TEST(Quadrature, EdgeCubic) {
  const EdgeRule e = make_edge_rule(3);
  EXPECT_EQ(e.size(), 2u);
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) sum += e.weights[i] * std::pow(e.points[i], 3);
  EXPECT_NEAR(sum, 0.25, 1e-15);
}

TEST(Quadrature, ExactOnAllMonomials) {
  for (int deg = 1; deg <= 20; ++deg) {
    const QuadratureRule q = make_quadrature(deg);
    EXPECT_GE(q.exact_degree, deg);
    for (double w : q.weights) EXPECT_GT(w, 0.0);
    for (const Vec2& p : q.points) {
      EXPECT_GE(p[0], 0.0);
      EXPECT_GE(p[1], 0.0);
      EXPECT_LE(p[0] + p[1], 1.0);
    }
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        const double exact = simplex_monomial(a, b);
        EXPECT_NEAR(integrate(q, a, b), exact, 1e-13 * exact) << "degree " << deg << " monomial " << a << "," << b;
      }
  }
}

TEST(Quadrature, EdgeRulePointCount) {
  for (int deg = 0; deg <= 20; ++deg) {
    const EdgeRule e = make_edge_rule(deg);
    EXPECT_EQ(static_cast<int>(e.size()), std::max(1, (deg + 2) / 2));
    for (int p = 0; p <= deg; ++p) {
      double sum = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) sum += e.weights[i] * std::pow(e.points[i], p);
      EXPECT_NEAR(sum, 1.0 / (p + 1), 1e-14);
    }
  }
}

TEST(Quadrature, RejectsUnsupportedDegrees) {
  EXPECT_THROW(make_quadrature(0), Error);
  EXPECT_THROW(make_quadrature(21), Error);
}

TEST(Polynomial, DerivativesAndProducts) {
  const Poly2 p = Poly2::monomial(2, 1, 3.0);  // 3 r^2 s
  EXPECT_DOUBLE_EQ(p(2.0, 5.0), 60.0);
  EXPECT_DOUBLE_EQ(p.dr()(2.0, 5.0), 60.0);
  EXPECT_DOUBLE_EQ(p.ds()(2.0, 5.0), 12.0);
  const Poly2 q = Poly2::affine(1.0, 2.0, -1.0);
  EXPECT_DOUBLE_EQ((p * q)(0.5, 2.0), p(0.5, 2.0) * q(0.5, 2.0));
  EXPECT_DOUBLE_EQ(q.pow(3)(0.3, 0.1), std::pow(q(0.3, 0.1), 3));
  EXPECT_EQ(dim_pk(3), 10);
}

TEST(ReferenceBasis, Dimensions) {
  const ReferenceBasis b1 = build_reference_basis(1);
  EXPECT_EQ(b1.dim(), 3);
  EXPECT_EQ(b1.vector_dim(), 6);
  EXPECT_EQ(b1.tensor_dim(), 12);
  EXPECT_EQ(b1.face_dim(), 2);
  EXPECT_EQ(build_reference_basis(3).dim(), 10);
  EXPECT_THROW(build_reference_basis(0), Error);
  EXPECT_THROW(build_reference_basis(7), Error);
}

TEST(ReferenceBasis, Orthonormal) {
  for (int k = 1; k <= 6; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const RealVector w = Eigen::Map<const RealVector>(rb.quad.weights.data(), rb.quad.size());
    const RealMatrix gram = rb.values.transpose() * w.asDiagonal() * rb.values;
    EXPECT_LE((gram - RealMatrix::Identity(rb.dim(), rb.dim())).cwiseAbs().maxCoeff(), 1e-12) << "k=" << k;
    EXPECT_TRUE(std::isfinite(rb.monomial_gram_condition));
    const RealVector we = Eigen::Map<const RealVector>(rb.edge.weights.data(), rb.edge.size());
    const RealMatrix fgram = rb.face_values.transpose() * we.asDiagonal() * rb.face_values;
    EXPECT_LE((fgram - RealMatrix::Identity(k + 1, k + 1)).cwiseAbs().maxCoeff(), 1e-12) << "k=" << k;
  }
}

TEST(ReferenceBasis, HierarchicalSpan) {
  // the first dim P_m functions have degree <= m
  const ReferenceBasis rb = build_reference_basis(4);
  for (int m = 0; m <= 4; ++m)
    for (int i = 0; i < dim_pk(m); ++i) {
      const Poly2& p = rb.scalar[i];
      for (int a = 0; a <= p.degree(); ++a)
        for (int b = 0; a + b <= p.degree(); ++b)
          if (a + b > m) {
            EXPECT_NEAR(p.coeff(a, b), 0.0, 1e-12);
          }
    }
}

TEST(ReferenceBasis, DerivativesMatchFiniteDifferences) {
  const double h = 2e-4;
  for (int k = 1; k <= 6; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    for (std::size_t q = 0; q < rb.quad.size(); ++q) {
      const Vec2 r = rb.quad.points[q];
      for (int i = 0; i < rb.dim(); ++i) {
        const Poly2& p = rb.scalar[i];
        const auto d = [&](const Vec2& e) {
          return (p(r[0] - 2 * h * e[0], r[1] - 2 * h * e[1]) - 8 * p(r[0] - h * e[0], r[1] - h * e[1]) +
                  8 * p(r[0] + h * e[0], r[1] + h * e[1]) - p(r[0] + 2 * h * e[0], r[1] + 2 * h * e[1])) /
                 (12 * h);
        };
        const double fr = d(Vec2(1, 0)), fs = d(Vec2(0, 1));
        EXPECT_NEAR(rb.d_r(q, i), fr, 1e-7 * (1.0 + std::abs(fr)));
        EXPECT_NEAR(rb.d_s(q, i), fs, 1e-7 * (1.0 + std::abs(fs)));
      }
    }
  }
}

TEST(AffineMap, IdentityKeepsTables) {
  const ReferenceBasis rb = build_reference_basis(2);
  const PhysicalTables t = map_to_physical(rb, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
  EXPECT_EQ((t.values - rb.values).norm(), 0.0);
  EXPECT_EQ((t.d_x - rb.d_r).norm(), 0.0);
  EXPECT_EQ((t.d_y - rb.d_s).norm(), 0.0);
  for (std::size_t q = 0; q < rb.quad.size(); ++q) EXPECT_EQ(t.weights[q], rb.quad.weights[q]);
}

TEST(AffineMap, AreaAndGradients) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const ReferenceBasis rb = build_reference_basis(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::array<Vec2, 3> tri{Vec2(u(gen), u(gen)), Vec2(u(gen), u(gen)), Vec2(u(gen), u(gen))};
    const AffineMap map(tri);
    const double shoelace = 0.5 * std::abs((tri[1] - tri[0])[0] * (tri[2] - tri[0])[1] -
                                           (tri[1] - tri[0])[1] * (tri[2] - tri[0])[0]);
    const PhysicalTables t = map_to_physical(rb, tri);
    EXPECT_NEAR(t.weights.sum(), shoelace, 1e-14 * std::max(1.0, shoelace));
    EXPECT_NEAR(t.weights.sum(), 0.5 * std::abs(map.detJ), 1e-14 * std::max(1.0, shoelace));
    // gradient of phi_i o F^-1 by finite differences in x
    const double h = 1e-6;
    for (std::size_t q = 0; q < rb.quad.size(); q += 7)
      for (int i = 0; i < rb.dim(); ++i) {
        const auto f = [&](const Vec2& x) { return rb.scalar[i](map.to_reference(x)); };
        const Vec2 x = t.points[q];
        const double gx = (f(x + Vec2(h, 0)) - f(x - Vec2(h, 0))) / (2 * h);
        const double gy = (f(x + Vec2(0, h)) - f(x - Vec2(0, h))) / (2 * h);
        const double scale = std::max({1.0, std::abs(gx), std::abs(gy)});
        EXPECT_NEAR(t.d_x(q, i), gx, 1e-6 * scale);
        EXPECT_NEAR(t.d_y(q, i), gy, 1e-6 * scale);
      }
  }
  EXPECT_THROW(AffineMap({Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)}), Error);
}
