#pragma once

// Error norms of a computed solution against exact fields.
//
// Volume errors are L2 over the respective subdomain. Trace errors use
// |||e||| = (sum_K h_K ||e||^2_dK)^(1/2) with e_uhat = P_M u - uhat_h and
// e_vhat = P_M v - vhat_h; e_qhat = P_M(q.n) - q_hat_h.n per element face.

#include "hdg/verify/manufactured.hpp"

#include <cmath>
#include <limits>

namespace hdg {

inline constexpr double not_applicable = std::numeric_limits<double>::quiet_NaN();

struct ErrorRecord {
  double sigma = not_applicable;
  double u = not_applicable;
  double gamma = not_applicable;
  double q = not_applicable;
  double v = not_applicable;
  double uhat = not_applicable;
  double vhat = not_applicable;
  double qhat = not_applicable;
};

/// Local trace vector of an element assembled from the recovered face traces.
inline ComplexVector element_traces(const Mesh& mesh, const FieldSolution& sol, int element) {
  const bool elastic = mesh.triangles[element].domain == Subdomain::elastic;
  const int block = (elastic ? 2 : 1) * (sol.k + 1);
  ComplexVector out(3 * block);
  for (int j = 0; j < 3; ++j) {
    const int f = mesh.element_faces[element][j];
    const ComplexVector& t = elastic ? sol.uhat[f] : sol.vhat[f];
    if (t.size() != block) throw Error("missing trace on face " + std::to_string(f));
    out.segment(j * block, block) = t;
  }
  return out;
}

/// Pointwise evaluation of the discrete fields on one element.
struct ElementEvaluator {
  const ElementSpaces& es;
  const ComplexVector& x;

  Complex scalar(const ComplexVector& c, Eigen::Index q) const {
    return (es.volume.values.row(q).cast<Complex>() * c)(0);
  }
  CMat2 sigma(Eigen::Index q) const {
    const StressBasis& sb = *es.stress;
    CMat2 s;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s(i, j) = (sb.value[i][j].row(q).cast<Complex>() * x.head(sb.size()))(0);
    return s;
  }
  CVec2 u(Eigen::Index q) const {
    const ElasticLayout lay{es.stress->size(), es.dim()};
    return {scalar(x.segment(lay.u(0, 0), es.dim()), q), scalar(x.segment(lay.u(1, 0), es.dim()), q)};
  }
  CMat2 gamma(Eigen::Index q) const {
    const ElasticLayout lay{es.stress->size(), es.dim()};
    const Complex p = scalar(x.segment(lay.gamma(0), es.dim()), q);
    CMat2 g = CMat2::Zero();
    g(0, 1) = p;
    g(1, 0) = -p;
    return g;
  }
  CVec2 qfield(Eigen::Index q) const {
    const AcousticLayout lay{es.dim()};
    return {scalar(x.segment(lay.q(0, 0), es.dim()), q), scalar(x.segment(lay.q(1, 0), es.dim()), q)};
  }
  Complex v(Eigen::Index q) const {
    const AcousticLayout lay{es.dim()};
    return scalar(x.segment(lay.v(0), es.dim()), q);
  }
};

inline ErrorRecord compute_errors(const Mesh& mesh, const ReferenceBasis& rb, const ModelParams& params,
                                  const FieldSolution& sol, const ExactFields& ex) {
  ErrorRecord r;
  double s2 = 0, u2 = 0, g2 = 0, q2 = 0, v2 = 0, uh2 = 0, vh2 = 0, qh2 = 0;
  bool has_e = false, has_a = false;
  const int kf = rb.face_dim();

  std::vector<ComplexVector> pm_u(mesh.num_faces()), pm_v(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (has_elastic_trace(mesh.faces[f].kind) && ex.u) pm_u[f] = project_face_vector(mesh, f, rb, ex.u);
    if (has_acoustic_trace(mesh.faces[f].kind) && ex.v) pm_v[f] = project_face_scalar(mesh, f, rb, ex.v);
  }

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementSpaces es = build_element_spaces(mesh, e, rb);
    const ElementEvaluator ev{es, sol.volume[e]};
    const PhysicalTables& vol = es.volume;
    const double hK = es.diameter;
    if (es.domain == Subdomain::elastic) {
      has_e = true;
      for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(vol.points.size()); ++q) {
        const Vec2& x = vol.points[q];
        const double w = vol.weights[q];
        if (ex.sigma) s2 += w * (ex.sigma(x) - ev.sigma(q)).squaredNorm();
        if (ex.u) u2 += w * (ex.u(x) - ev.u(q)).squaredNorm();
        if (ex.gamma) g2 += w * (ex.gamma(x) - ev.gamma(q)).squaredNorm();
      }
      if (ex.u)
        for (int j = 0; j < 3; ++j) {
          const int f = mesh.element_faces[e][j];
          uh2 += hK * (pm_u[f] - sol.uhat[f]).squaredNorm();
        }
    } else {
      has_a = true;
      for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(vol.points.size()); ++q) {
        const Vec2& x = vol.points[q];
        const double w = vol.weights[q];
        if (ex.q) q2 += w * (ex.q(x) - ev.qfield(q)).squaredNorm();
        if (ex.v) v2 += w * std::norm(ex.v(x) - ev.v(q));
      }
      if (ex.v)
        for (int j = 0; j < 3; ++j) {
          const int f = mesh.element_faces[e][j];
          vh2 += hK * (pm_v[f] - sol.vhat[f]).squaredNorm();
        }
      if (ex.q) {
        const ComplexVector flux = reconstruct_flux(es, params, sol.volume[e], element_traces(mesh, sol, e));
        for (int j = 0; j < 3; ++j) {
          const FaceQuadrature& fq = es.faces[j];
          ComplexVector pq = ComplexVector::Zero(kf);
          for (std::size_t q = 0; q < fq.points.size(); ++q) {
            const CVec2 g = ex.q(fq.points[q]);
            pq += (fq.weights[q] * (g[0] * fq.normal[0] + g[1] * fq.normal[1])) *
                  fq.trace.row(q).transpose().cast<Complex>();
          }
          qh2 += hK * (pq - flux.segment(j * kf, kf)).squaredNorm();
        }
      }
    }
  }
  if (has_e) {
    if (ex.sigma) r.sigma = std::sqrt(s2);
    if (ex.u) r.u = std::sqrt(u2), r.uhat = std::sqrt(uh2);
    if (ex.gamma) r.gamma = std::sqrt(g2);
  }
  if (has_a) {
    if (ex.q) r.q = std::sqrt(q2), r.qhat = std::sqrt(qh2);
    if (ex.v) r.v = std::sqrt(v2), r.vhat = std::sqrt(vh2);
  }
  return r;
}

/// Squared-sum norms of the exact fields, for relative comparisons.
inline ErrorRecord exact_norms(const Mesh& mesh, const ReferenceBasis& rb, const ExactFields& ex) {
  FieldSolution zero;
  zero.k = rb.k;
  ModelParams params;
  zero.uhat.resize(mesh.num_faces());
  zero.vhat.resize(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (has_elastic_trace(mesh.faces[f].kind)) zero.uhat[f] = ComplexVector::Zero(2 * rb.face_dim());
    if (has_acoustic_trace(mesh.faces[f].kind)) zero.vhat[f] = ComplexVector::Zero(rb.face_dim());
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementSpaces es = build_element_spaces(mesh, e, rb);
    const int n = es.domain == Subdomain::elastic ? ElasticLayout{es.stress->size(), es.dim()}.size()
                                                  : AcousticLayout{es.dim()}.size();
    zero.volume.push_back(ComplexVector::Zero(n));
  }
  return compute_errors(mesh, rb, params, zero, ex);
}

/// e.o.c. = log(e1 / e2) / log(h1 / h2)
inline double eoc(double e1, double e2, double h1, double h2) {
  if (!(e1 > 0.0) || !(e2 > 0.0) || !std::isfinite(e1) || !std::isfinite(e2)) return not_applicable;
  return std::log(e1 / e2) / std::log(h1 / h2);
}

/// |||e||| from per-element pairs (h_K, ||e||^2_dK).
inline double trace_norm(const std::vector<std::pair<double, double>>& hk_and_sq) {
  double s = 0.0;
  for (const auto& [h, sq] : hk_and_sq) s += h * sq;
  return std::sqrt(s);
}

} // namespace hdg
