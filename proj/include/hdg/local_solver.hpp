#pragma once

// Element-level HDG systems and their static condensation.
//
// Each element carries volume unknowns X and, on its three faces, trace
// unknowns L (face j occupies the j-th block, components outer, face modes
// inner). The discrete local equations read
//
//     A X + B L = F
//
// and the face moments of the numerical flux against every trace test function
// are
//
//     flux = C X + D L.
//
// Elastic (sigma in V(K), u in P_k^2, gamma in A(K)):
//   (C^-1 sigma, tau) + (u, div tau) + (gamma, tau) - <uhat, tau n> = 0
//   (sigma, grad t) - <sigma_hat n, t> + rhoE s^2 (u, t)           = (f, t)
//   (sigma, eta)                                                   = 0
//   sigma_hat n = sigma n - tauE (u - uhat)
//
// Acoustic (q in P_k^2, v in P_k):
//   (q, r) + (v, div r) - <vhat, r.n>                    = 0
//   (q, grad w) - <q_hat.n, w> + (s/c)^2 (v, w)          = (f, w)
//   q_hat.n = q.n - tauA (v - vhat)
//
// Condensation gives X = lift L + rhs_volume and flux = condensed L + rhs_trace.

#include "hdg/element.hpp"
#include "hdg/params.hpp"

#include <Eigen/LU>

#include <functional>

namespace hdg {

using VectorField = std::function<CVec2(const Vec2&)>;
using ScalarField = std::function<Complex(const Vec2&)>;
using TensorField = std::function<CMat2(const Vec2&)>;

struct LocalSystem {
  int element = -1;
  Subdomain kind = Subdomain::acoustic;
  int volume_dim = 0;
  int trace_dim = 0;
  int face_block = 0;  // trace unknowns per face

  ComplexMatrix A, B, C, D;
  ComplexVector F;

  ComplexMatrix condensed;  // trace_dim x trace_dim
  ComplexMatrix lift;       // volume_dim x trace_dim
  ComplexVector rhs_volume;
  ComplexVector rhs_trace;
  double min_pivot_ratio = 0.0;

  ComplexVector lift_volume(const ComplexVector& traces) const {
    return lift * traces + rhs_volume;
  }
};

/// Unknown layout of the elastic volume vector.
struct ElasticLayout {
  int stress;  // number of stress functions
  int dim;     // dim P_k

  int sigma(int n) const { return n; }
  int u(int c, int m) const { return stress + c * dim + m; }
  int gamma(int m) const { return stress + 2 * dim + m; }
  int size() const { return stress + 3 * dim; }
};

struct AcousticLayout {
  int dim;

  int q(int c, int m) const { return c * dim + m; }
  int v(int m) const { return 2 * dim + m; }
  int size() const { return 3 * dim; }
};

namespace detail {

inline void condense(LocalSystem& ls) {
  Eigen::PartialPivLU<ComplexMatrix> lu(ls.A);
  const double scale = ls.A.cwiseAbs().maxCoeff();
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  Eigen::Index where = 0;
  const double min_pivot = pivots.minCoeff(&where);
  ls.min_pivot_ratio = min_pivot / scale;
  if (!(ls.min_pivot_ratio > 1e-13))
    throw SingularSystemError("singular local volume block on element " +
                              std::to_string(ls.element) + " (pivot " + std::to_string(where) +
                              ", |pivot|/|A| = " + std::to_string(ls.min_pivot_ratio) + ")");
  const ComplexMatrix ainv_b = lu.solve(ls.B);
  const ComplexVector ainv_f = lu.solve(ls.F);
  ls.lift = -ainv_b;
  ls.rhs_volume = ainv_f;
  ls.condensed = ls.D - ls.C * ainv_b;
  ls.rhs_trace = ls.C * ainv_f;
}

inline RealMatrix weighted(const RealMatrix& a, const RealVector& w, const RealMatrix& b) {
  return a.transpose() * w.asDiagonal() * b;
}

} // namespace detail

inline LocalSystem assemble_elastic_local(const ElementSpaces& es, const ModelParams& params,
                                          const VectorField& source = {}) {
  if (es.domain != Subdomain::elastic || !es.stress)
    throw Error("assemble_elastic_local called on a non-elastic element");
  const StressBasis& sb = *es.stress;
  const PhysicalTables& vol = es.volume;
  const RealVector& w = vol.weights;
  const int d = es.dim(), kf = es.k() + 1, ns = sb.size();
  const ElasticLayout lay{ns, d};

  LocalSystem ls;
  ls.element = es.element;
  ls.kind = Subdomain::elastic;
  ls.volume_dim = lay.size();
  ls.face_block = 2 * kf;
  ls.trace_dim = 3 * ls.face_block;
  ls.A = ComplexMatrix::Zero(ls.volume_dim, ls.volume_dim);
  ls.B = ComplexMatrix::Zero(ls.volume_dim, ls.trace_dim);
  ls.C = ComplexMatrix::Zero(ls.trace_dim, ls.volume_dim);
  ls.D = ComplexMatrix::Zero(ls.trace_dim, ls.trace_dim);
  ls.F = ComplexVector::Zero(ls.volume_dim);

  const auto& S = sb.value;
  const RealMatrix trS = S[0][0] + S[1][1];
  const double cinv = params.lambda / (2.0 * params.mu * (2.0 * params.lambda + 2.0 * params.mu));
  RealMatrix ss = RealMatrix::Zero(ns, ns);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ss += detail::weighted(S[i][j], w, S[i][j]) / (2.0 * params.mu);
  ss -= cinv * detail::weighted(trS, w, trS);
  ls.A.topLeftCorner(ns, ns) = ss.cast<Complex>();

  const RealMatrix mass = detail::weighted(vol.values, w, vol.values);
  const RealMatrix skew = S[0][1] - S[1][0];
  const RealMatrix sg = detail::weighted(skew, w, vol.values);  // (eta_m, S_n)
  ls.A.block(0, lay.gamma(0), ns, d) = sg.cast<Complex>();
  ls.A.block(lay.gamma(0), 0, d, ns) = sg.transpose().cast<Complex>();

  const Complex rho_s2 = params.rhoE * params.s * params.s;
  for (int c = 0; c < 2; ++c) {
    // (u_c phi_m, (div S_n)_c)
    const RealMatrix su = detail::weighted(sb.divergence[c], w, vol.values);
    ls.A.block(0, lay.u(c, 0), ns, d) = su.cast<Complex>();
    // (S_n, grad(e_c phi_m)) = sum_j (S_n)_cj d_j phi_m
    const RealMatrix us = detail::weighted(vol.d_x, w, S[c][0]) + detail::weighted(vol.d_y, w, S[c][1]);
    ls.A.block(lay.u(c, 0), 0, d, ns) += us.cast<Complex>();
    ls.A.block(lay.u(c, 0), lay.u(c, 0), d, d) += rho_s2 * mass.cast<Complex>();
  }

  for (int j = 0; j < 3; ++j) {
    const FaceQuadrature& fq = es.faces[j];
    const double tau = params.tau_elastic(fq.face);
    const RealMatrix ff = detail::weighted(fq.scalar, fq.weights, fq.scalar);
    const RealMatrix ft = detail::weighted(fq.scalar, fq.weights, fq.trace);
    const RealMatrix tt = detail::weighted(fq.trace, fq.weights, fq.trace);
    for (int c = 0; c < 2; ++c) {
      const int col = j * ls.face_block + c * kf;
      const RealMatrix snt = detail::weighted(fq.stress_normal[c], fq.weights, fq.trace);
      const RealMatrix fsn = detail::weighted(fq.scalar, fq.weights, fq.stress_normal[c]);
      ls.B.block(0, col, ns, kf) -= snt.cast<Complex>();
      ls.A.block(lay.u(c, 0), 0, d, ns) -= fsn.cast<Complex>();
      ls.A.block(lay.u(c, 0), lay.u(c, 0), d, d) += tau * ff.cast<Complex>();
      ls.B.block(lay.u(c, 0), col, d, kf) -= tau * ft.cast<Complex>();

      ls.C.block(col, 0, kf, ns) += snt.transpose().cast<Complex>();
      ls.C.block(col, lay.u(c, 0), kf, d) -= tau * ft.transpose().cast<Complex>();
      ls.D.block(col, col, kf, kf) += tau * tt.cast<Complex>();
    }
  }

  if (source) {
    for (std::size_t q = 0; q < vol.points.size(); ++q) {
      const CVec2 f = source(vol.points[q]);
      for (int c = 0; c < 2; ++c)
        ls.F.segment(lay.u(c, 0), d) += (w[q] * f[c]) * vol.values.row(q).transpose().cast<Complex>();
    }
  }
  detail::condense(ls);
  return ls;
}

inline LocalSystem assemble_acoustic_local(const ElementSpaces& es, const ModelParams& params,
                                           const ScalarField& source = {}) {
  if (es.domain != Subdomain::acoustic)
    throw Error("assemble_acoustic_local called on a non-acoustic element");
  const PhysicalTables& vol = es.volume;
  const RealVector& w = vol.weights;
  const int d = es.dim(), kf = es.k() + 1;
  const AcousticLayout lay{d};

  LocalSystem ls;
  ls.element = es.element;
  ls.kind = Subdomain::acoustic;
  ls.volume_dim = lay.size();
  ls.face_block = kf;
  ls.trace_dim = 3 * kf;
  ls.A = ComplexMatrix::Zero(ls.volume_dim, ls.volume_dim);
  ls.B = ComplexMatrix::Zero(ls.volume_dim, ls.trace_dim);
  ls.C = ComplexMatrix::Zero(ls.trace_dim, ls.volume_dim);
  ls.D = ComplexMatrix::Zero(ls.trace_dim, ls.trace_dim);
  ls.F = ComplexVector::Zero(ls.volume_dim);

  const RealMatrix mass = detail::weighted(vol.values, w, vol.values);
  const Complex s_c2 = (params.s / params.c) * (params.s / params.c);
  for (int c = 0; c < 2; ++c) {
    const RealMatrix& dc = c == 0 ? vol.d_x : vol.d_y;
    const RealMatrix grad_mass = detail::weighted(dc, w, vol.values);  // (d_c phi_row, phi_col)
    ls.A.block(lay.q(c, 0), lay.q(c, 0), d, d) = mass.cast<Complex>();
    ls.A.block(lay.q(c, 0), lay.v(0), d, d) = grad_mass.cast<Complex>();
    ls.A.block(lay.v(0), lay.q(c, 0), d, d) = grad_mass.cast<Complex>();
  }
  ls.A.block(lay.v(0), lay.v(0), d, d) = s_c2 * mass.cast<Complex>();

  for (int j = 0; j < 3; ++j) {
    const FaceQuadrature& fq = es.faces[j];
    const double tau = params.tau_acoustic(fq.face);
    const RealMatrix ff = detail::weighted(fq.scalar, fq.weights, fq.scalar);
    const RealMatrix ft = detail::weighted(fq.scalar, fq.weights, fq.trace);
    const RealMatrix tt = detail::weighted(fq.trace, fq.weights, fq.trace);
    const int col = j * kf;
    for (int c = 0; c < 2; ++c) {
      const double nc = fq.normal[c];
      ls.B.block(lay.q(c, 0), col, d, kf) -= nc * ft.cast<Complex>();
      ls.A.block(lay.v(0), lay.q(c, 0), d, d) -= nc * ff.cast<Complex>();
      ls.C.block(col, lay.q(c, 0), kf, d) += nc * ft.transpose().cast<Complex>();
    }
    ls.A.block(lay.v(0), lay.v(0), d, d) += tau * ff.cast<Complex>();
    ls.B.block(lay.v(0), col, d, kf) -= tau * ft.cast<Complex>();
    ls.C.block(col, lay.v(0), kf, d) -= tau * ft.transpose().cast<Complex>();
    ls.D.block(col, col, kf, kf) += tau * tt.cast<Complex>();
  }

  if (source) {
    for (std::size_t q = 0; q < vol.points.size(); ++q)
      ls.F.segment(lay.v(0), d) +=
          (w[q] * source(vol.points[q])) * vol.values.row(q).transpose().cast<Complex>();
  }
  detail::condense(ls);
  return ls;
}

inline LocalSystem assemble_local(const ElementSpaces& es, const ModelParams& params,
                                  const VectorField& elastic_source,
                                  const ScalarField& acoustic_source) {
  return es.domain == Subdomain::elastic ? assemble_elastic_local(es, params, elastic_source)
                                         : assemble_acoustic_local(es, params, acoustic_source);
}

/// Face moments of the numerical flux (sigma_hat n or q_hat.n, outward for this
/// element) against the face basis, evaluated pointwise from the volume
/// coefficients and the traces. Layout matches the local trace vector.
inline ComplexVector reconstruct_flux(const ElementSpaces& es, const ModelParams& params,
                                      const ComplexVector& volume, const ComplexVector& traces) {
  const int d = es.dim(), kf = es.k() + 1;
  if (es.domain == Subdomain::elastic) {
    const ElasticLayout lay{es.stress->size(), d};
    ComplexVector out(6 * kf);
    for (int j = 0; j < 3; ++j) {
      const FaceQuadrature& fq = es.faces[j];
      const double tau = params.tau_elastic(fq.face);
      for (int c = 0; c < 2; ++c) {
        const int col = j * 2 * kf + c * kf;
        const ComplexVector sn = fq.stress_normal[c].cast<Complex>() * volume.head(lay.stress);
        const ComplexVector uh = fq.scalar.cast<Complex>() * volume.segment(lay.u(c, 0), d);
        const ComplexVector uhat = fq.trace.cast<Complex>() * traces.segment(col, kf);
        const ComplexVector flux = sn - tau * (uh - uhat);
        out.segment(col, kf) = fq.trace.transpose().cast<Complex>() * (fq.weights.cast<Complex>().asDiagonal() * flux);
      }
    }
    return out;
  }
  const AcousticLayout lay{d};
  ComplexVector out(3 * kf);
  for (int j = 0; j < 3; ++j) {
    const FaceQuadrature& fq = es.faces[j];
    const double tau = params.tau_acoustic(fq.face);
    const ComplexMatrix phi = fq.scalar.cast<Complex>();
    const ComplexVector qn = fq.normal[0] * (phi * volume.segment(lay.q(0, 0), d)) +
                             fq.normal[1] * (phi * volume.segment(lay.q(1, 0), d));
    const ComplexVector vh = phi * volume.segment(lay.v(0), d);
    const ComplexVector vhat = fq.trace.cast<Complex>() * traces.segment(j * kf, kf);
    const ComplexVector flux = qn - tau * (vh - vhat);
    out.segment(j * kf, kf) = fq.trace.transpose().cast<Complex>() * (fq.weights.cast<Complex>().asDiagonal() * flux);
  }
  return out;
}

} // namespace hdg
