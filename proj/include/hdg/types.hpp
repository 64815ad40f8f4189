#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace hdg {

using Real = double;
using Complex = std::complex<double>;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using CVec2 = Eigen::Vector2cd;
using CMat2 = Eigen::Matrix2cd;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when model parameters violate the solvability hypothesis Re(s tau) > 0.
class HypothesisError : public Error {
public:
  using Error::Error;
};

/// Raised when a local or global linear system cannot be factorized.
class SingularSystemError : public Error {
public:
  using Error::Error;
};

/// Number of scalar polynomials of total degree at most k in two variables.
constexpr int dim_pk(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

/// Number of polynomials of degree at most k on a face (one variable).
constexpr int dim_face(int k) { return k + 1; }

} // namespace hdg
