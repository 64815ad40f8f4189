#pragma once

#include "hdg/types.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace hdg {

struct LameParameters {
  double lambda;
  double mu;
};

/// lambda = E nu / ((1 + nu)(1 - 2 nu)), mu = E / (2 (1 + nu)).
inline LameParameters lame_from_young(double young, double poisson) {
  if (!(young > 0.0) || !(poisson > -1.0 && poisson < 0.5))
    throw Error("invalid Young's modulus / Poisson ratio");
  return {young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)),
          young / (2.0 * (1.0 + poisson))};
}

/// C M = 2 mu M + lambda tr(M) I
template <typename Matrix>
Matrix hooke_apply(const Matrix& M, double lambda, double mu) {
  Matrix out = 2.0 * mu * M;
  const auto tr = M.trace();
  out(0, 0) += lambda * tr;
  out(1, 1) += lambda * tr;
  return out;
}

/// C^{-1} M = M / (2 mu) - lambda tr(M) I / (2 mu (2 lambda + 2 mu))   (n = 2)
template <typename Matrix>
Matrix hooke_inverse_apply(const Matrix& M, double lambda, double mu) {
  Matrix out = M / (2.0 * mu);
  const auto tr = M.trace();
  const double c = lambda / (2.0 * mu * (2.0 * lambda + 2.0 * mu));
  out(0, 0) -= c * tr;
  out(1, 1) -= c * tr;
  return out;
}

/// Physical and discretisation parameters of one solve.
struct ModelParams {
  Complex s{2.0, -1.0};
  double c = 1.0;
  double rhoE = 1.0;
  double rhoF = 1.0;
  double lambda = 0.0;
  double mu = 1.0;
  double tauE = 1.0;
  double tauA = 1.0;
  /// Optional per-face overrides indexed by face id; empty means constant.
  std::vector<double> tauE_face;
  std::vector<double> tauA_face;

  double tau_elastic(int face) const { return tauE_face.empty() ? tauE : tauE_face.at(face); }
  double tau_acoustic(int face) const { return tauA_face.empty() ? tauA : tauA_face.at(face); }

  static ModelParams from_young(double young, double poisson) {
    ModelParams p;
    const auto l = lame_from_young(young, poisson);
    p.lambda = l.lambda;
    p.mu = l.mu;
    return p;
  }
};

/// Reject parameters for which the discrete problem is not known to be uniquely
/// solvable: requires Re(s tau_A) > 0 and Re(s tau_E) > 0 on every face, plus
/// physically valid material constants.
inline void check_hypothesis(const ModelParams& p) {
  const auto fail = [](const std::string& what) {
    throw HypothesisError("unique solvability requires Re(s*tauA) > 0 and Re(s*tauE) > 0: " +
                          what);
  };
  const auto check = [&](double tau, const char* name) {
    if (!((p.s * tau).real() > 0.0)) {
      std::ostringstream os;
      os << "Re(s*" << name << ") = " << (p.s * tau).real() << " with s = " << p.s.real() << ","
         << p.s.imag() << ", " << name << " = " << tau;
      fail(os.str());
    }
  };
  check(p.tauA, "tauA");
  check(p.tauE, "tauE");
  for (double t : p.tauA_face) check(t, "tauA");
  for (double t : p.tauE_face) check(t, "tauE");
  if (!(p.mu > 0.0) || !(p.lambda >= 0.0)) throw Error("invalid Lame parameters");
  if (!(p.c > 0.0) || !(p.rhoE > 0.0) || !(p.rhoF > 0.0))
    throw Error("sound speed and densities must be positive");
}

} // namespace hdg
