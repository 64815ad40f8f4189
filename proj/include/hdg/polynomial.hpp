#pragma once

#include "hdg/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hdg {

/// Bivariate polynomial in monomial form sum c_ab r^a s^b, a + b <= degree.
///
/// Coefficients are stored graded by total degree: index(a, b) = n(n+1)/2 + b
/// with n = a + b, so the first dim_pk(m) entries always describe the part of
/// degree <= m. All operations are exact up to floating point rounding, which
/// is what the space constructions rely on (curl, divergence, products with
/// the bubble are carried out symbolically).
class Poly2 {
public:
  Poly2() : Poly2(0) {}
  explicit Poly2(int degree) : degree_(std::max(degree, 0)), c_(dim_pk(degree_), 0.0) {}

  static Poly2 constant(double value) {
    Poly2 p(0);
    p.c_[0] = value;
    return p;
  }

  /// r^a s^b
  static Poly2 monomial(int a, int b, double coeff = 1.0) {
    Poly2 p(a + b);
    p.coeff(a, b) = coeff;
    return p;
  }

  /// The affine polynomial c0 + cr r + cs s.
  static Poly2 affine(double c0, double cr, double cs) {
    Poly2 p(1);
    p.coeff(0, 0) = c0;
    p.coeff(1, 0) = cr;
    p.coeff(0, 1) = cs;
    return p;
  }

  static constexpr int index(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }

  int degree() const { return degree_; }
  double& coeff(int a, int b) { return c_[index(a, b)]; }
  double coeff(int a, int b) const {
    return a + b > degree_ ? 0.0 : c_[index(a, b)];
  }
  const std::vector<double>& coefficients() const { return c_; }

  double operator()(double r, double s) const {
    // Horner in s for each power of r would need reordering; direct powers are
    // cheap enough for degree <= 10.
    double result = 0.0;
    double rp = 1.0;
    for (int a = 0; a <= degree_; ++a) {
      double sp = 1.0;
      for (int b = 0; a + b <= degree_; ++b) {
        result += c_[index(a, b)] * rp * sp;
        sp *= s;
      }
      rp *= r;
    }
    return result;
  }
  double operator()(const Vec2& x) const { return (*this)(x[0], x[1]); }

  Poly2 dr() const {
    Poly2 p(std::max(degree_ - 1, 0));
    for (int a = 1; a <= degree_; ++a)
      for (int b = 0; a + b <= degree_; ++b) p.coeff(a - 1, b) = a * coeff(a, b);
    return p;
  }

  Poly2 ds() const {
    Poly2 p(std::max(degree_ - 1, 0));
    for (int a = 0; a <= degree_; ++a)
      for (int b = 1; a + b <= degree_; ++b) p.coeff(a, b - 1) = b * coeff(a, b);
    return p;
  }

  /// Directional derivative alpha d/dr + beta d/ds.
  Poly2 derivative(double alpha, double beta) const { return dr() * alpha + ds() * beta; }

  Poly2& operator+=(const Poly2& o) {
    if (o.degree_ > degree_) grow(o.degree_);
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Poly2& operator-=(const Poly2& o) { return *this += o * -1.0; }
  Poly2& operator*=(double f) {
    for (double& v : c_) v *= f;
    return *this;
  }

  friend Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
  friend Poly2 operator-(Poly2 a, const Poly2& b) { return a -= b; }
  friend Poly2 operator*(Poly2 a, double f) { return a *= f; }
  friend Poly2 operator*(double f, Poly2 a) { return a *= f; }
  friend Poly2 operator-(Poly2 a) { return a *= -1.0; }

  friend Poly2 operator*(const Poly2& p, const Poly2& q) {
    Poly2 out(p.degree_ + q.degree_);
    for (int a1 = 0; a1 <= p.degree_; ++a1)
      for (int b1 = 0; a1 + b1 <= p.degree_; ++b1) {
        const double c1 = p.coeff(a1, b1);
        if (c1 == 0.0) continue;
        for (int a2 = 0; a2 <= q.degree_; ++a2)
          for (int b2 = 0; a2 + b2 <= q.degree_; ++b2)
            out.coeff(a1 + a2, b1 + b2) += c1 * q.coeff(a2, b2);
      }
    return out;
  }

  Poly2 pow(int n) const {
    Poly2 out = constant(1.0);
    for (int i = 0; i < n; ++i) out = out * *this;
    return out;
  }

  /// Largest absolute coefficient.
  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

private:
  void grow(int degree) {
    c_.resize(dim_pk(degree), 0.0);
    degree_ = degree;
  }

  int degree_;
  std::vector<double> c_;
};

/// Values of all monomials r^a s^b, a + b <= degree, at a point, in Poly2 index order.
inline RealVector monomial_values(int degree, double r, double s) {
  RealVector out(dim_pk(degree));
  for (int n = 0; n <= degree; ++n)
    for (int b = 0; b <= n; ++b) out[Poly2::index(n - b, b)] = std::pow(r, n - b) * std::pow(s, b);
  return out;
}

/// 2x2 matrix of polynomials; rows are the "rows" on which divergence acts.
struct PolyMat2 {
  Poly2 m[2][2];

  Mat2 operator()(const Vec2& x) const {
    Mat2 v;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) v(i, j) = m[i][j](x);
    return v;
  }
};

} // namespace hdg
