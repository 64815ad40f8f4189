#pragma once

#include "hdg/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace hdg {

/// Quadrature on the reference triangle {r >= 0, s >= 0, r + s <= 1}.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Quadrature on the unit interval [0, 1].
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return points.size(); }
};

namespace detail {

/// Gauss-Jacobi nodes and weights on [-1, 1] for the weight (1-x)^alpha (1+x)^beta
/// via the Golub-Welsch eigenvalue method.
inline void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& x,
                         std::vector<double>& w) {
  RealMatrix jac = RealMatrix::Zero(n, n);
  const double ab = alpha + beta;
  for (int i = 0; i < n; ++i) {
    const double d = 2.0 * i + ab;
    const double num = beta * beta - alpha * alpha;
    jac(i, i) = (num == 0.0) ? 0.0 : num / (d * (d + 2.0));
    if (i + 1 < n) {
      const double m = i + 1.0;
      const double dm = 2.0 * m + ab;
      const double b2 =
          4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (dm * dm * (dm + 1.0) * (dm - 1.0));
      jac(i, i + 1) = jac(i + 1, i) = std::sqrt(b2);
    }
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(jac);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                     std::tgamma(ab + 2.0);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = eig.eigenvalues()[i];
    const double v0 = eig.eigenvectors()(0, i);
    w[i] = mu0 * v0 * v0;
  }
}

} // namespace detail

/// Gauss-Legendre rule on [0, 1] exact for polynomials of the given degree,
/// using ceil((degree + 1) / 2) points.
inline EdgeRule make_edge_rule(int exact_degree) {
  if (exact_degree < 0 || exact_degree > 60)
    throw Error("unsupported edge quadrature degree " + std::to_string(exact_degree));
  const int n = std::max(1, (exact_degree + 2) / 2);
  std::vector<double> x, w;
  detail::gauss_jacobi(n, 0.0, 0.0, x, w);
  EdgeRule rule;
  rule.exact_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(0.5 * (1.0 + x[i]));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

/// Collapsed (conical product) rule on the reference triangle: Gauss-Jacobi(1,0)
/// in s times Gauss-Legendre in the collapsed direction. All weights are positive.
/// The one-point rule is the centroid rule.
inline QuadratureRule make_quadrature(int exact_degree) {
  if (exact_degree < 1 || exact_degree > 20)
    throw Error("unsupported quadrature degree " + std::to_string(exact_degree) +
                " (supported: 1..20)");
  const int n = (exact_degree + 2) / 2;
  std::vector<double> xl, wl, xj, wj;
  detail::gauss_jacobi(n, 0.0, 0.0, xl, wl);
  detail::gauss_jacobi(n, 1.0, 0.0, xj, wj);
  QuadratureRule rule;
  rule.exact_degree = 2 * n - 1;
  for (int j = 0; j < n; ++j) {
    const double v = 0.5 * (1.0 + xj[j]);
    const double wv = 0.25 * wj[j];
    for (int i = 0; i < n; ++i) {
      const double u = 0.5 * (1.0 + xl[i]);
      rule.points.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(0.5 * wl[i] * wv);
    }
  }
  return rule;
}

} // namespace hdg
