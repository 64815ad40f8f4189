#pragma once

// HDG projections used by the error analysis.
//
// Pi_A (q, v) on K: (Pi q, r)_K = (q, r)_K and (Pi v, w)_K = (v, w)_K for r, w
// in P_{k-1}, and on each face <Pi q.n - tau Pi v, xi>_F = <q.n - tau v, xi>_F
// for xi in P_k(F). Pi_E applies the same definition to every row of sigma
// together with the matching component of u; Pi_E sigma lies in the full
// tensor P_k, not in V(K).

#include "hdg/local_solver.hpp"
#include "hdg/skeleton.hpp"

#include <optional>

namespace hdg {

/// Exact fields of a problem; empty callables mark absent variables.
struct ExactFields {
  TensorField sigma;
  VectorField u;
  TensorField gamma;
  VectorField q;
  ScalarField v;
};

struct ProjectionResult {
  ComplexVector coeffs;
  double residual = 0.0;  // ||M x - b|| / ||b|| of the defining system
};

namespace detail {

inline double relative_residual(const ComplexMatrix& M, const ComplexVector& x, const ComplexVector& b) {
  const double r = (M * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

/// Mixed projection of one (vector, scalar) pair; coefficients are the vector
/// components (scalar basis each) followed by the scalar, as in AcousticLayout.
inline ProjectionResult mixed_projection(const ElementSpaces& es, double tau,
                                         const std::function<CVec2(const Vec2&)>& flux,
                                         const std::function<Complex(const Vec2&)>& scalar) {
  const int d = es.dim(), k = es.k(), kf = k + 1;
  const int d1 = dim_pk(k - 1);
  const AcousticLayout lay{d};
  const int n = lay.size();
  ComplexMatrix M = ComplexMatrix::Zero(n, n);
  ComplexVector b = ComplexVector::Zero(n);
  const PhysicalTables& vol = es.volume;
  const RealVector& w = vol.weights;
  const RealMatrix mass = weighted(vol.values.leftCols(d1), w, vol.values);

  int row = 0;
  for (int c = 0; c < 2; ++c, row += d1) {
    M.block(row, lay.q(c, 0), d1, d) = mass.cast<Complex>();
    for (std::size_t q = 0; q < vol.points.size(); ++q)
      b.segment(row, d1) += (w[q] * flux(vol.points[q])[c]) *
                            vol.values.row(q).head(d1).transpose().cast<Complex>();
  }
  M.block(row, lay.v(0), d1, d) = mass.cast<Complex>();
  for (std::size_t q = 0; q < vol.points.size(); ++q)
    b.segment(row, d1) += (w[q] * scalar(vol.points[q])) * vol.values.row(q).head(d1).transpose().cast<Complex>();
  row += d1;

  for (int j = 0; j < 3; ++j, row += kf) {
    const FaceQuadrature& fq = es.faces[j];
    const RealMatrix tf = weighted(fq.trace, fq.weights, fq.scalar);
    for (int c = 0; c < 2; ++c) M.block(row, lay.q(c, 0), kf, d) = fq.normal[c] * tf.cast<Complex>();
    M.block(row, lay.v(0), kf, d) = -tau * tf.cast<Complex>();
    for (std::size_t q = 0; q < fq.points.size(); ++q) {
      const CVec2 fl = flux(fq.points[q]);
      const Complex g = fl[0] * fq.normal[0] + fl[1] * fq.normal[1] - tau * scalar(fq.points[q]);
      b.segment(row, kf) += (fq.weights[q] * g) * fq.trace.row(q).transpose().cast<Complex>();
    }
  }

  Eigen::PartialPivLU<ComplexMatrix> lu(M);
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  if (!(piv.minCoeff() > 1e-13 * M.cwiseAbs().maxCoeff()))
    throw SingularSystemError("singular projection system on element " + std::to_string(es.element));
  ProjectionResult out;
  out.coeffs = lu.solve(b);
  out.residual = relative_residual(M, out.coeffs, b);
  return out;
}

} // namespace detail

/// Pi_A on one acoustic element; coefficients in AcousticLayout.
inline ProjectionResult project_acoustic(const ElementSpaces& es, const VectorField& q,
                                         const ScalarField& v, const ModelParams& params) {
  const double tau = params.tau_acoustic(es.faces[0].face);
  for (const auto& fq : es.faces)
    if (params.tau_acoustic(fq.face) != tau)
      throw Error("projection requires one tauA per element");
  if (!(tau > 0.0)) throw SingularSystemError("acoustic projection requires tauA > 0");
  return detail::mixed_projection(es, tau, q, v);
}

/// Pi_E on one elastic element. Coefficients: tensor P_k, entry (i, j) block
/// (2i + j) * dim P_k, followed by u component blocks.
inline ProjectionResult project_elastic(const ElementSpaces& es, const TensorField& sigma,
                                        const VectorField& u, const ModelParams& params) {
  const double tau = params.tau_elastic(es.faces[0].face);
  for (const auto& fq : es.faces)
    if (params.tau_elastic(fq.face) != tau)
      throw Error("projection requires one tauE per element");
  if (!(tau > 0.0)) throw SingularSystemError("elastic projection requires tauE > 0");
  const int d = es.dim();
  ProjectionResult out;
  out.coeffs = ComplexVector::Zero(6 * d);
  for (int i = 0; i < 2; ++i) {
    const auto row = [&](const Vec2& x) -> CVec2 { return sigma(x).row(i).transpose(); };
    const auto comp = [&](const Vec2& x) -> Complex { return u(x)[i]; };
    const ProjectionResult r = detail::mixed_projection(es, tau, row, comp);
    out.coeffs.segment(2 * i * d, 2 * d) = r.coeffs.head(2 * d);
    out.coeffs.segment(4 * d + i * d, d) = r.coeffs.tail(d);
    out.residual = std::max(out.residual, r.residual);
  }
  return out;
}

/// L2(K) projection onto A(K); returns the coefficients of the scalar p.
inline ProjectionResult project_spin(const ElementSpaces& es, const TensorField& gamma) {
  const PhysicalTables& vol = es.volume;
  const ComplexMatrix G = (2.0 * detail::weighted(vol.values, vol.weights, vol.values)).cast<Complex>();
  ComplexVector b = ComplexVector::Zero(es.dim());
  for (std::size_t q = 0; q < vol.points.size(); ++q) {
    const CMat2 g = gamma(vol.points[q]);
    b += (vol.weights[q] * (g(0, 1) - g(1, 0))) * vol.values.row(q).transpose().cast<Complex>();
  }
  ProjectionResult out;
  out.coeffs = G.ldlt().solve(b);
  out.residual = detail::relative_residual(G, out.coeffs, b);
  return out;
}

/// L2 projection P_M onto P_k(F) in the orthonormal face basis, by a Gram solve.
inline ProjectionResult project_face(const Mesh& mesh, int face, const ReferenceBasis& rb,
                                     const ScalarField& g) {
  const FaceFrame fr = face_geometry(mesh, face);
  const Face& f = mesh.faces[face];
  const Vec2 a = mesh.vertices[f.vertices[0]], bpt = mesh.vertices[f.vertices[1]];
  const int kf = rb.face_dim();
  const RealMatrix phi = rb.face_values / std::sqrt(fr.length);
  RealVector w(rb.edge.size());
  for (std::size_t q = 0; q < rb.edge.size(); ++q) w[q] = rb.edge.weights[q] * fr.length;
  const ComplexMatrix G = detail::weighted(phi, w, phi).cast<Complex>();
  ComplexVector b = ComplexVector::Zero(kf);
  for (std::size_t q = 0; q < rb.edge.size(); ++q)
    b += (w[q] * g(a + rb.edge.points[q] * (bpt - a))) * phi.row(q).transpose().cast<Complex>();
  ProjectionResult out;
  out.coeffs = G.ldlt().solve(b);
  out.residual = detail::relative_residual(G, out.coeffs, b);
  return out;
}

/// Squared projection errors per variable and the aggregate Theta.
struct ThetaReport {
  double sigma = 0.0, u = 0.0, gamma = 0.0, q = 0.0, v = 0.0;  // L2 norms of delta
  double theta = 0.0;
  double max_residual = 0.0;
};

inline ThetaReport compute_theta(const ExactFields& ex, const Mesh& mesh, const ReferenceBasis& rb,
                                 const ModelParams& params) {
  ThetaReport t;
  const int d = rb.dim();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementSpaces es = build_element_spaces(mesh, e, rb);
    const PhysicalTables& vol = es.volume;
    const ComplexMatrix phi = vol.values.cast<Complex>();
    if (es.domain == Subdomain::elastic) {
      if (ex.sigma && ex.u) {
        const ProjectionResult pe = project_elastic(es, ex.sigma, ex.u, params);
        t.max_residual = std::max(t.max_residual, pe.residual);
        for (std::size_t q = 0; q < vol.points.size(); ++q) {
          const Vec2& x = vol.points[q];
          const CMat2 s = ex.sigma(x);
          const CVec2 u = ex.u(x);
          for (int c = 0; c < 4; ++c)
            t.sigma += vol.weights[q] * std::norm((phi.row(q) * pe.coeffs.segment(c * d, d))(0) - s(c / 2, c % 2));
          for (int c = 0; c < 2; ++c)
            t.u += vol.weights[q] * std::norm((phi.row(q) * pe.coeffs.segment(4 * d + c * d, d))(0) - u[c]);
        }
      }
      if (ex.gamma) {
        const ProjectionResult ps = project_spin(es, ex.gamma);
        t.max_residual = std::max(t.max_residual, ps.residual);
        for (std::size_t q = 0; q < vol.points.size(); ++q) {
          const Complex p = (phi.row(q) * ps.coeffs)(0);
          const CMat2 g = ex.gamma(vol.points[q]);
          t.gamma += vol.weights[q] * (std::norm(g(0, 0)) + std::norm(g(1, 1)) +
                                       std::norm(g(0, 1) - p) + std::norm(g(1, 0) + p));
        }
      }
    } else if (ex.q && ex.v) {
      const ProjectionResult pa = project_acoustic(es, ex.q, ex.v, params);
      t.max_residual = std::max(t.max_residual, pa.residual);
      for (std::size_t q = 0; q < vol.points.size(); ++q) {
        const Vec2& x = vol.points[q];
        const CVec2 qq = ex.q(x);
        for (int c = 0; c < 2; ++c)
          t.q += vol.weights[q] * std::norm((phi.row(q) * pa.coeffs.segment(c * d, d))(0) - qq[c]);
        t.v += vol.weights[q] * std::norm((phi.row(q) * pa.coeffs.segment(2 * d, d))(0) - ex.v(x));
      }
    }
  }
  t.theta = std::sqrt(t.sigma + t.u + t.gamma + t.q + t.v);
  t.sigma = std::sqrt(t.sigma);
  t.u = std::sqrt(t.u);
  t.gamma = std::sqrt(t.gamma);
  t.q = std::sqrt(t.q);
  t.v = std::sqrt(t.v);
  return t;
}

} // namespace hdg
