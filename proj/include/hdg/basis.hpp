#pragma once

#include "hdg/polynomial.hpp"
#include "hdg/quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace hdg {

/// Quadrature exactness used for element and face integrals of degree-k spaces.
constexpr int assembly_degree(int k) { return 2 * k + 6; }

/// L2([0,1])-orthonormal Legendre polynomial of degree m.
inline double face_basis_value(int m, double t) {
  return std::sqrt(2.0 * m + 1.0) * std::legendre(m, 2.0 * t - 1.0);
}

/// Scalar P_k basis on the reference triangle together with evaluation tables.
///
/// The functions are centred monomials orthonormalised by two passes of modified
/// Gram-Schmidt in graded order, so the first dim_pk(m) functions span P_m. Vector
/// and tensor bases are formed componentwise: vector function (i, m) = e_i phi_m
/// has index i*dim + m, tensor function (i, j, m) = E_ij phi_m has index
/// (2i + j)*dim + m.
struct ReferenceBasis {
  int k = 0;
  std::vector<Poly2> scalar;
  QuadratureRule quad;
  RealMatrix values;  // quad point x function
  RealMatrix d_r;     // reference derivatives at quad points
  RealMatrix d_s;
  EdgeRule edge;
  RealMatrix face_values;  // edge point x face function, orthonormal on [0,1]
  double monomial_gram_condition = 0.0;

  int dim() const { return dim_pk(k); }
  int vector_dim() const { return 2 * dim(); }
  int tensor_dim() const { return 4 * dim(); }
  int face_dim() const { return k + 1; }
};

inline ReferenceBasis build_reference_basis(int k) {
  if (k < 1 || k > 6) throw Error("polynomial degree " + std::to_string(k) + " out of range 1..6");
  ReferenceBasis rb;
  rb.k = k;
  const int n = dim_pk(k);

  const Poly2 rc = Poly2::affine(-1.0 / 3.0, 1.0, 0.0);
  const Poly2 sc = Poly2::affine(-1.0 / 3.0, 0.0, 1.0);
  std::vector<Poly2> mono;
  for (int deg = 0; deg <= k; ++deg)
    for (int b = 0; b <= deg; ++b) mono.push_back(rc.pow(deg - b) * sc.pow(b));

  const QuadratureRule gs = make_quadrature(std::max(2 * k, 1));
  const auto table = [&](const std::vector<Poly2>& ps) {
    RealMatrix t(gs.size(), ps.size());
    for (std::size_t q = 0; q < gs.size(); ++q)
      for (std::size_t i = 0; i < ps.size(); ++i) t(q, i) = ps[i](gs.points[q]);
    return t;
  };
  const RealVector w = Eigen::Map<const RealVector>(gs.weights.data(), gs.size());
  {
    const RealMatrix t = table(mono);
    const RealMatrix gram = t.transpose() * w.asDiagonal() * t;
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(gram);
    rb.monomial_gram_condition = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  }

  const auto inner = [&](const Poly2& a, const Poly2& b) {
    double sum = 0.0;
    for (std::size_t q = 0; q < gs.size(); ++q) sum += w[q] * a(gs.points[q]) * b(gs.points[q]);
    return sum;
  };
  for (int i = 0; i < n; ++i) {
    Poly2 p = mono[i];
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) p -= rb.scalar[j] * inner(p, rb.scalar[j]);
    p *= 1.0 / std::sqrt(inner(p, p));
    rb.scalar.push_back(std::move(p));
  }

  rb.quad = make_quadrature(assembly_degree(k));
  const std::size_t nq = rb.quad.size();
  rb.values.resize(nq, n);
  rb.d_r.resize(nq, n);
  rb.d_s.resize(nq, n);
  for (int i = 0; i < n; ++i) {
    const Poly2 pr = rb.scalar[i].dr(), ps = rb.scalar[i].ds();
    for (std::size_t q = 0; q < nq; ++q) {
      rb.values(q, i) = rb.scalar[i](rb.quad.points[q]);
      rb.d_r(q, i) = pr(rb.quad.points[q]);
      rb.d_s(q, i) = ps(rb.quad.points[q]);
    }
  }

  rb.edge = make_edge_rule(assembly_degree(k));
  rb.face_values.resize(rb.edge.size(), k + 1);
  for (std::size_t q = 0; q < rb.edge.size(); ++q)
    for (int m = 0; m <= k; ++m) rb.face_values(q, m) = face_basis_value(m, rb.edge.points[q]);
  return rb;
}

/// Affine map x = x0 + J r from the reference triangle onto a physical triangle.
struct AffineMap {
  Vec2 x0;
  Mat2 J;
  Mat2 Jinv;
  double detJ = 0.0;

  explicit AffineMap(const std::array<Vec2, 3>& p) : x0(p[0]) {
    J.col(0) = p[1] - p[0];
    J.col(1) = p[2] - p[0];
    detJ = J.determinant();
    const double scale = std::max(J.col(0).squaredNorm(), J.col(1).squaredNorm());
    if (!(std::abs(detJ) > 1e-14 * scale)) throw Error("degenerate triangle");
    Jinv = J.inverse();
  }

  Vec2 to_physical(const Vec2& r) const { return x0 + J * r; }
  Vec2 to_reference(const Vec2& x) const { return Jinv * (x - x0); }

  /// Physical derivative d/dx_i of a polynomial expressed in reference coordinates.
  Poly2 d_phys(const Poly2& p, int i) const { return p.derivative(Jinv(0, i), Jinv(1, i)); }
};

/// Reference tables pushed forward to one physical triangle.
struct PhysicalTables {
  std::vector<Vec2> points;
  RealVector weights;
  RealMatrix values;
  RealMatrix d_x;
  RealMatrix d_y;
};

inline PhysicalTables map_to_physical(const ReferenceBasis& rb, const std::array<Vec2, 3>& tri) {
  const AffineMap map(tri);
  PhysicalTables t;
  const std::size_t nq = rb.quad.size();
  t.points.resize(nq);
  t.weights.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    t.points[q] = map.to_physical(rb.quad.points[q]);
    t.weights[q] = rb.quad.weights[q] * std::abs(map.detJ);
  }
  t.values = rb.values;
  // grad_x = J^{-T} grad_r
  t.d_x = rb.d_r * map.Jinv(0, 0) + rb.d_s * map.Jinv(1, 0);
  t.d_y = rb.d_r * map.Jinv(0, 1) + rb.d_s * map.Jinv(1, 1);
  return t;
}

} // namespace hdg
