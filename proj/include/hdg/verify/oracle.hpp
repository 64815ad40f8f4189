#pragma once

// Independent checks of a computed solution: an uncondensed (monolithic) solve,
// flux single-valuedness, the discrete transmission conditions, weak symmetry
// and the discrete energies of the homogeneous problem.

#include "hdg/verify/errors.hpp"

namespace hdg {

/// All volume and trace unknowns in one sparse system, solved without
/// condensation. Returns the same FieldSolution layout as the HDG path.
inline FieldSolution solve_monolithic(const Mesh& mesh, const ReferenceBasis& rb,
                                      const ModelParams& params, const ProblemData& data) {
  check_hypothesis(params);
  const std::vector<LocalSystem> locals = assemble_locals(mesh, rb, params, data);
  const DofMap dm = number_traces(mesh, rb, data);
  std::vector<int> vol_off(mesh.num_elements());
  int total_volume = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    vol_off[e] = total_volume;
    total_volume += locals[e].volume_dim;
  }
  const int T = total_volume;
  const int n = T + dm.size;
  ComplexVector rhs = ComplexVector::Zero(n);
  std::vector<Eigen::Triplet<Complex>> trip;

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const LocalSystem& ls = locals[e];
    const auto [col, fixed] = detail::trace_columns(mesh, dm, e, ls.face_block);
    for (int i = 0; i < ls.volume_dim; ++i) {
      const int row = vol_off[e] + i;
      for (int l = 0; l < ls.volume_dim; ++l)
        if (ls.A(i, l) != Complex(0.0)) trip.emplace_back(row, vol_off[e] + l, ls.A(i, l));
      rhs[row] += ls.F[i];
      for (int l = 0; l < ls.trace_dim; ++l) {
        if (col[l] >= 0) trip.emplace_back(row, T + col[l], ls.B(i, l));
        else rhs[row] -= ls.B(i, l) * fixed[l];
      }
    }
    for (int j = 0; j < 3; ++j) {
      const auto [row0, sign] = detail::flux_row(mesh, dm, e, j);
      if (row0 < 0) continue;
      for (int i = 0; i < ls.face_block; ++i) {
        const int li = j * ls.face_block + i;
        const int row = T + row0 + i;
        for (int l = 0; l < ls.volume_dim; ++l)
          if (ls.C(li, l) != Complex(0.0)) trip.emplace_back(row, vol_off[e] + l, sign * ls.C(li, l));
        for (int l = 0; l < ls.trace_dim; ++l) {
          if (col[l] >= 0) trip.emplace_back(row, T + col[l], sign * ls.D(li, l));
          else rhs[row] -= sign * ls.D(li, l) * fixed[l];
        }
      }
    }
  }
  detail::add_face_terms(mesh, rb, params, data, dm, T, trip, rhs);

  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw SingularSystemError("monolithic system singular: " + lu.lastErrorMessage());
  const ComplexVector x = lu.solve(rhs);

  FieldSolution sol;
  sol.k = rb.k;
  for (int e = 0; e < mesh.num_elements(); ++e) sol.volume.push_back(x.segment(vol_off[e], locals[e].volume_dim));
  const ComplexVector traces = x.tail(dm.size);
  sol.uhat.resize(mesh.num_faces());
  sol.vhat.resize(mesh.num_faces());
  const int kf = rb.face_dim();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (dm.uhat[f] >= 0) sol.uhat[f] = traces.segment(dm.uhat[f], 2 * kf);
    else if (dm.uhat_fixed[f].size()) sol.uhat[f] = dm.uhat_fixed[f];
    if (dm.vhat[f] >= 0) sol.vhat[f] = traces.segment(dm.vhat[f], kf);
    else if (dm.vhat_fixed[f].size()) sol.vhat[f] = dm.vhat_fixed[f];
  }
  return sol;
}

/// max over all coefficient blocks of ||a - b|| / max(||a||, ||b||), with the
/// norm of the whole solution as the floor.
inline double solution_difference(const FieldSolution& a, const FieldSolution& b) {
  double diff2 = 0.0, norm2 = 0.0;
  const auto acc = [&](const std::vector<ComplexVector>& x, const std::vector<ComplexVector>& y) {
    if (x.size() != y.size()) throw Error("solutions have different layouts");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != y[i].size()) throw Error("solutions have different layouts");
      diff2 += (x[i] - y[i]).squaredNorm();
      norm2 += x[i].squaredNorm();
    }
  };
  acc(a.volume, b.volume);
  acc(a.uhat, b.uhat);
  acc(a.vhat, b.vhat);
  return norm2 > 0.0 ? std::sqrt(diff2 / norm2) : std::sqrt(diff2);
}

inline double solution_norm(const FieldSolution& a) {
  double n2 = 0.0;
  for (const auto& x : a.volume) n2 += x.squaredNorm();
  for (const auto& x : a.uhat) n2 += x.squaredNorm();
  for (const auto& x : a.vhat) n2 += x.squaredNorm();
  return std::sqrt(n2);
}

struct ConservationReport {
  double elastic_jump = 0.0;   // max over interior elastic faces, relative
  double acoustic_jump = 0.0;  // interior acoustic faces
  double velocity_condition = 0.0;  // discrete transmission, scalar equation
  double force_condition = 0.0;     // discrete transmission, vector equation
  double weak_symmetry = 0.0;       // max_K |(sigma_h, eta)| / ||sigma_h||
};

inline ConservationReport check_conservation(const Mesh& mesh, const ReferenceBasis& rb,
                                             const ModelParams& params, const ProblemData& data,
                                             const FieldSolution& sol) {
  ConservationReport rep;
  const int kf = rb.face_dim();
  // flux moments per (face, side)
  std::vector<std::array<ComplexVector, 2>> flux(mesh.num_faces());
  double flux_scale = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementSpaces es = build_element_spaces(mesh, e, rb);
    const ComplexVector fl = reconstruct_flux(es, params, sol.volume[e], element_traces(mesh, sol, e));
    const int block = es.domain == Subdomain::elastic ? 2 * kf : kf;
    for (int j = 0; j < 3; ++j) {
      const int f = mesh.element_faces[e][j];
      const auto& sides = mesh.faces[f].sides;
      const int s = sides[0].element == e ? 0 : 1;
      flux[f][s] = fl.segment(j * block, block);
      flux_scale = std::max(flux_scale, flux[f][s].norm());
    }
    if (es.domain == Subdomain::elastic) {
      const StressBasis& sb = *es.stress;
      const RealMatrix skew = sb.value[0][1] - sb.value[1][0];
      const RealMatrix sg = detail::weighted(es.volume.values, es.volume.weights, skew);
      const ComplexVector sigma = sol.volume[e].head(sb.size());
      const ElementEvaluator ev{es, sol.volume[e]};
      double snorm2 = 0.0;
      for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(es.volume.points.size()); ++q)
        snorm2 += es.volume.weights[q] * ev.sigma(q).squaredNorm();
      const double snorm = std::sqrt(snorm2);
      const double r = (sg.cast<Complex>() * sigma).norm();
      rep.weak_symmetry = std::max(rep.weak_symmetry, snorm > 0.0 ? r / snorm : r);
    }
  }
  const double floor = flux_scale > 0.0 ? flux_scale : 1.0;

  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.kind == FaceKind::interiorE || face.kind == FaceKind::interiorA) {
      const double jump = (flux[f][0] + flux[f][1]).norm() / floor;
      double& slot = face.kind == FaceKind::interiorE ? rep.elastic_jump : rep.acoustic_jump;
      slot = std::max(slot, jump);
    }
    if (face.kind != FaceKind::gamma) continue;
    const Vec2 nE = face.normal, nA = -nE;
    const ComplexVector& sigma_n = flux[f][0];  // elastic side first
    const ComplexVector& q_n = flux[f][1];
    const ComplexVector& uh = sol.uhat[f];
    const ComplexVector& vh = sol.vhat[f];
    const Complex s = params.s, rs = params.rhoF * params.s;

    ComplexVector r1 = q_n - s * (nE[0] * uh.head(kf) + nE[1] * uh.tail(kf));
    ComplexVector rhs1 = ComplexVector::Zero(kf);
    if (data.incident_gradient)
      rhs1 -= project_face_scalar(mesh, f, rb, [&](const Vec2& x) {
        const CVec2 g = data.incident_gradient(x);
        return g[0] * nA[0] + g[1] * nA[1];
      });
    if (data.interface_scalar)
      rhs1 += project_face_scalar(mesh, f, rb, [&](const Vec2& x) { return data.interface_scalar(x, nE); });
    const double scale1 = std::max({q_n.norm(), std::abs(s) * uh.norm(), rhs1.norm(), 1e-300});
    rep.velocity_condition = std::max(rep.velocity_condition, (r1 - rhs1).norm() / scale1);

    ComplexVector r2(2 * kf), rhs2 = ComplexVector::Zero(2 * kf);
    for (int c = 0; c < 2; ++c) r2.segment(c * kf, kf) = -sigma_n.segment(c * kf, kf) + rs * nA[c] * vh;
    if (data.incident) {
      const ComplexVector vinc = project_face_scalar(mesh, f, rb, data.incident);
      for (int c = 0; c < 2; ++c) rhs2.segment(c * kf, kf) -= rs * nA[c] * vinc;
    }
    if (data.interface_vector)
      rhs2 += project_face_vector(mesh, f, rb, [&](const Vec2& x) { return data.interface_vector(x, nE); });
    const double scale2 = std::max({sigma_n.norm(), std::abs(rs) * vh.norm(), rhs2.norm(), 1e-300});
    rep.force_condition = std::max(rep.force_condition, (r2 - rhs2).norm() / scale2);
  }
  return rep;
}

/// Squared discrete energies E_E^2 and E_A^2 of a solution:
///   E_E^2 = Re(s) ||sigma_h||^2_{C^-1} + Re(s tauE) ||u_h - uhat_h||^2_dT_E
///   E_A^2 = rhoF Re(s) ||q_h||^2 + rhoF Re(s tauA) ||v_h - vhat_h||^2_dT_A
struct DiscreteEnergy {
  double elastic = 0.0;
  double acoustic = 0.0;
};

inline DiscreteEnergy discrete_energy(const Mesh& mesh, const ReferenceBasis& rb,
                                      const ModelParams& params, const FieldSolution& sol) {
  DiscreteEnergy en;
  const double res = params.s.real();
  const int d = rb.dim(), kf = rb.face_dim();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementSpaces es = build_element_spaces(mesh, e, rb);
    const ElementEvaluator ev{es, sol.volume[e]};
    const auto npts = static_cast<Eigen::Index>(es.volume.points.size());
    const ComplexVector tr = element_traces(mesh, sol, e);
    if (es.domain == Subdomain::elastic) {
      const ElasticLayout lay{es.stress->size(), d};
      for (Eigen::Index q = 0; q < npts; ++q) {
        const CMat2 s = ev.sigma(q);
        const CMat2 cs = hooke_inverse_apply(s, params.lambda, params.mu);
        en.elastic += res * es.volume.weights[q] * (cs.array() * s.conjugate().array()).sum().real();
      }
      for (int j = 0; j < 3; ++j) {
        const FaceQuadrature& fq = es.faces[j];
        const double st = (params.s * params.tau_elastic(fq.face)).real();
        for (int c = 0; c < 2; ++c) {
          const ComplexVector diff = fq.scalar.cast<Complex>() * sol.volume[e].segment(lay.u(c, 0), d) -
                                     fq.trace.cast<Complex>() * tr.segment(j * 2 * kf + c * kf, kf);
          en.elastic += st * (fq.weights.array() * diff.array().abs2()).sum();
        }
      }
    } else {
      const AcousticLayout lay{d};
      for (Eigen::Index q = 0; q < npts; ++q)
        en.acoustic += params.rhoF * res * es.volume.weights[q] * ev.qfield(q).squaredNorm();
      for (int j = 0; j < 3; ++j) {
        const FaceQuadrature& fq = es.faces[j];
        const double st = (params.s * params.tau_acoustic(fq.face)).real();
        const ComplexVector diff = fq.scalar.cast<Complex>() * sol.volume[e].segment(lay.v(0), d) -
                                   fq.trace.cast<Complex>() * tr.segment(j * kf, kf);
        en.acoustic += params.rhoF * st * (fq.weights.array() * diff.array().abs2()).sum();
      }
    }
  }
  return en;
}

} // namespace hdg
