#pragma once

// Local spaces for the elastic unknowns (two dimensions only).
//
//   A(K): skew matrices [[0, p], [-p, 0]] with p in P_k; one scalar field per
//         member, so dim A(K) = dim P_k.
//   b_K:  product of the three barycentric coordinates (degree 3, vanishes on dK).
//   B(K): curl((curl A(K)) b_K). With the row-wise matrix curl
//         curl M = (d_x M12 - d_y M11, d_x M22 - d_y M21) and the vector curl
//         curl m = [[-d_y m1, d_x m1], [-d_y m2, d_x m2]], a member of A(K)
//         with scalar p maps to curl(b_K grad p). Every member has zero
//         row-wise divergence and zero normal trace M n on dK.
//   V(K): P_k^{2x2} (+) curl(b_K grad p), p homogeneous of degree k in local
//         coordinates; the added part has k + 1 functions of degree k + 1.
//
// In 3D the bubble is the matrix sum over faces of prod_{F' != F} eta_F'
// grad(eta_F) (x) grad(eta_F); that case is not built here.

#include "hdg/basis.hpp"

#include <Eigen/SVD>

#include <array>
#include <functional>
#include <vector>

namespace hdg {

/// Product of the barycentric coordinates of `point` with respect to `tri`.
inline double bubble_matrix_2d(const std::array<Vec2, 3>& tri, const Vec2& point) {
  const AffineMap map(tri);
  const Vec2 r = map.to_reference(point);
  return (1.0 - r[0] - r[1]) * r[0] * r[1];
}

/// Physical partial derivative d/dx_i of a polynomial.
using PartialDerivative = std::function<Poly2(const Poly2&, int)>;

/// Derivative for polynomials written directly in physical coordinates.
inline Poly2 cartesian_partial(const Poly2& p, int i) { return i == 0 ? p.dr() : p.ds(); }

inline std::array<Poly2, 2> matrix_curl(const PolyMat2& M, const PartialDerivative& d) {
  return {d(M.m[0][1], 0) - d(M.m[0][0], 1), d(M.m[1][1], 0) - d(M.m[1][0], 1)};
}

inline PolyMat2 vector_curl(const std::array<Poly2, 2>& v, const PartialDerivative& d) {
  PolyMat2 out;
  for (int i = 0; i < 2; ++i) {
    out.m[i][0] = -d(v[i], 1);
    out.m[i][1] = d(v[i], 0);
  }
  return out;
}

/// Row-wise divergence of a matrix field.
inline std::array<Poly2, 2> row_divergence(const PolyMat2& M, const PartialDerivative& d) {
  return {d(M.m[0][0], 0) + d(M.m[0][1], 1), d(M.m[1][0], 0) + d(M.m[1][1], 1)};
}

/// Member of A(K) generated by the scalar p.
inline PolyMat2 spin_matrix(const Poly2& p) {
  PolyMat2 out;
  out.m[0][0] = Poly2(0);
  out.m[1][1] = Poly2(0);
  out.m[0][1] = p;
  out.m[1][0] = -p;
  return out;
}

/// curl of the spin matrix generated by p; equals grad p.
inline std::array<Poly2, 2> curl2d_of_spin(const Poly2& p,
                                           const PartialDerivative& d = cartesian_partial) {
  return matrix_curl(spin_matrix(p), d);
}

/// Enriched stress basis V(K) on one physical triangle.
///
/// Functions 0 .. 4*dim P_k - 1 are the componentwise tensor basis (see
/// ReferenceBasis); the remaining k + 1 are the divergence-free bubbles,
/// scaled to unit L2(K) norm. Bubble polynomials are written in the local
/// coordinates xi = (x - center) / scale, so that their derivatives are plain
/// Cartesian ones.
struct StressBasis {
  int k = 0;
  int tensor_dim = 0;
  Vec2 center = Vec2::Zero();
  double scale = 1.0;
  std::vector<PolyMat2> bubbles;
  std::vector<std::array<Poly2, 2>> bubble_divergence;
  // volume tables (quad point x function), entry (i, j) and row divergence i
  std::array<std::array<RealMatrix, 2>, 2> value;
  std::array<RealMatrix, 2> divergence;

  int size() const { return tensor_dim + static_cast<int>(bubbles.size()); }
  int bubble_dim() const { return static_cast<int>(bubbles.size()); }

  Vec2 local(const Vec2& x) const { return (x - center) / scale; }
  Mat2 bubble(int n, const Vec2& x) const { return bubbles[n](local(x)); }
  Vec2 bubble_div(int n, const Vec2& x) const {
    const Vec2 xi = local(x);
    return {bubble_divergence[n][0](xi), bubble_divergence[n][1](xi)};
  }
};

inline StressBasis build_stress_basis(const ReferenceBasis& rb, const std::array<Vec2, 3>& tri) {
  const int k = rb.k;
  const int d = rb.dim();
  const AffineMap map(tri);
  StressBasis sb;
  sb.k = k;
  sb.tensor_dim = 4 * d;
  sb.center = (tri[0] + tri[1] + tri[2]) / 3.0;
  sb.scale = std::max({(tri[1] - tri[0]).norm(), (tri[2] - tri[1]).norm(), (tri[0] - tri[2]).norm()});

  // barycentric coordinates as affine functions of xi; the centroid sits at (1/3, 1/3)
  const Mat2 rj = sb.scale * map.Jinv;
  const Poly2 l1 = Poly2::affine(1.0 / 3.0, rj(0, 0), rj(0, 1));
  const Poly2 l2 = Poly2::affine(1.0 / 3.0, rj(1, 0), rj(1, 1));
  const Poly2 l0 = Poly2::affine(1.0 / 3.0, -rj(0, 0) - rj(1, 0), -rj(0, 1) - rj(1, 1));
  const Poly2 b = l0 * l1 * l2;

  // curls and divergences are taken in xi; d/dx = (1 / scale) d/dxi is folded into the normalisation
  const PhysicalTables vol = map_to_physical(rb, tri);
  for (int a = 0; a <= k; ++a) {
    const Poly2 p = Poly2::monomial(k - a, a);
    const auto grad = curl2d_of_spin(p);
    PolyMat2 B = vector_curl({b * grad[0], b * grad[1]}, cartesian_partial);
    double norm2 = 0.0;
    for (std::size_t q = 0; q < vol.points.size(); ++q)
      norm2 += vol.weights[q] * B(sb.local(vol.points[q])).squaredNorm();
    const double factor = 1.0 / std::sqrt(norm2);
    std::array<Poly2, 2> div = row_divergence(B, cartesian_partial);
    for (auto& row : B.m)
      for (auto& e : row) e *= factor;
    for (auto& e : div) e *= factor / sb.scale;
    sb.bubble_divergence.push_back(std::move(div));
    sb.bubbles.push_back(std::move(B));
  }

  const int ns = sb.size();
  const Eigen::Index nq = rb.values.rows();
  for (auto& row : sb.value)
    for (auto& m : row) m = RealMatrix::Zero(nq, ns);
  for (auto& m : sb.divergence) m = RealMatrix::Zero(nq, ns);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const int c = 2 * i + j;
      sb.value[i][j].middleCols(c * d, d) = vol.values;
      sb.divergence[i].middleCols(c * d, d) = j == 0 ? vol.d_x : vol.d_y;
    }
  for (int n = 0; n < sb.bubble_dim(); ++n)
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Mat2 v = sb.bubble(n, vol.points[q]);
      const Vec2 dv = sb.bubble_div(n, vol.points[q]);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) sb.value[i][j](q, sb.tensor_dim + n) = v(i, j);
        sb.divergence[i](q, sb.tensor_dim + n) = dv[i];
      }
    }
  return sb;
}

/// Values of every stress basis function at a physical point.
inline std::vector<Mat2> stress_values(const ReferenceBasis& rb, const StressBasis& sb, const AffineMap& map,
                                       const Vec2& x) {
  const int d = rb.dim();
  const Vec2 r = map.to_reference(x);
  std::vector<Mat2> out(sb.size(), Mat2::Zero());
  for (int m = 0; m < d; ++m) {
    const double phi = rb.scalar[m](r);
    for (int c = 0; c < 4; ++c) out[c * d + m](c / 2, c % 2) = phi;
  }
  for (int n = 0; n < sb.bubble_dim(); ++n) out[sb.tensor_dim + n] = sb.bubble(n, x);
  return out;
}

/// Numerical rank of the L2(K) Gram matrix of the stress basis, each function
/// scaled to unit norm first.
inline int stress_gram_rank(const ReferenceBasis& rb, const StressBasis& sb,
                            const std::array<Vec2, 3>& tri, double rel_tol = 1e-10) {
  const PhysicalTables vol = map_to_physical(rb, tri);
  const int ns = sb.size();
  RealMatrix gram = RealMatrix::Zero(ns, ns);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      gram += sb.value[i][j].transpose() * vol.weights.asDiagonal() * sb.value[i][j];
  const RealVector scale = gram.diagonal().cwiseSqrt().cwiseInverse();
  gram = scale.asDiagonal() * gram * scale.asDiagonal();
  Eigen::JacobiSVD<RealMatrix> svd(gram);
  const RealVector sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) ++rank;
  return rank;
}

} // namespace hdg
