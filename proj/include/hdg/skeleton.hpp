#pragma once

// Global trace system. Unknowns are the displacement trace uhat (2(k+1) per
// elastic face) and the acoustic trace vhat (k+1 per acoustic face); interface
// faces carry both. Dirichlet traces (outer acoustic boundary, elastic boundary
// in standalone mode) are the face L2 projection of the data and are eliminated.
//
// Rows per face kind, with flux = condensed * traces + rhs_trace per element:
//   interiorE  sum_K <sigma_hat n_K, mu> = 0
//   interiorA  sum_K <q_hat.n_K, xi> = 0
//   gammaAN    <q_hat.n, xi> = <g_N, xi>
//   gamma      uhat rows: <-sigma_hat n_E + rhoF s vhat n_A, mu>
//                            = -rhoF s <vinc n_A, mu> + <g2, mu>
//              vhat rows: <q_hat.n_A - s uhat.n_E, xi>
//                            = -<grad vinc . n_A, xi> + <g1, xi>
// The elastic flux balance is imposed on interior elastic faces only; on the
// interface the balance of normal forces replaces it.

#include "hdg/local_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <fstream>
#include <sstream>

namespace hdg {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Boundary, interface and source data of one problem. Empty callables mean zero.
struct ProblemData {
  VectorField elastic_source;
  ScalarField acoustic_source;
  ScalarField dirichlet;                                    // g_D on gammaAD
  std::function<Complex(const Vec2&, const Vec2&)> neumann; // g_N(x, n_A) on gammaAN
  VectorField elastic_dirichlet;                            // uhat on elasticBoundary
  ScalarField incident;                                     // v_inc
  VectorField incident_gradient;                            // grad v_inc
  /// Extra right-hand side terms on the interface, functions of (x, n_E).
  std::function<Complex(const Vec2&, const Vec2&)> interface_scalar;  // added to the velocity condition
  std::function<CVec2(const Vec2&, const Vec2&)> interface_vector;    // added to the force balance
};

struct DofMap {
  int k = 0;
  int size = 0;
  std::vector<int> uhat;  // first global index on each face, -1 if none
  std::vector<int> vhat;
  std::vector<ComplexVector> uhat_fixed;  // prescribed coefficients, empty if free
  std::vector<ComplexVector> vhat_fixed;

  int face_modes() const { return k + 1; }
};

struct SkeletonSystem {
  DofMap dofs;
  SparseMatrix matrix;
  ComplexVector rhs;
};

struct FieldSolution {
  int k = 0;
  std::vector<ComplexVector> volume;  // per element, local layout
  std::vector<ComplexVector> uhat;    // per face, empty when absent
  std::vector<ComplexVector> vhat;
};

/// Face L2 projection P_M of a field onto the orthonormal face basis.
template <typename Field>
auto project_face_field(const Mesh& mesh, int face, const ReferenceBasis& rb, const Field& g) {
  const Face& f = mesh.faces.at(face);
  const Vec2 a = mesh.vertices[f.vertices[0]], b = mesh.vertices[f.vertices[1]];
  using Value = decltype(g(a));
  std::vector<Value> coeff(rb.face_dim(), Value{} * 0.0);
  const double inv_sqrt_len = 1.0 / std::sqrt(f.length);
  for (std::size_t q = 0; q < rb.edge.size(); ++q) {
    const Value gv = g(a + rb.edge.points[q] * (b - a));
    const double w = rb.edge.weights[q] * f.length * inv_sqrt_len;
    for (int m = 0; m < rb.face_dim(); ++m) coeff[m] += (w * rb.face_values(q, m)) * gv;
  }
  return coeff;
}

inline ComplexVector project_face_scalar(const Mesh& mesh, int face, const ReferenceBasis& rb,
                                         const ScalarField& g) {
  const auto c = project_face_field(mesh, face, rb, g);
  return Eigen::Map<const ComplexVector>(c.data(), static_cast<Eigen::Index>(c.size()));
}

/// Vector projection in trace layout (component outer, mode inner).
inline ComplexVector project_face_vector(const Mesh& mesh, int face, const ReferenceBasis& rb,
                                         const VectorField& g) {
  const auto c = project_face_field(mesh, face, rb, [&](const Vec2& x) -> CVec2 { return g(x); });
  const int kf = rb.face_dim();
  ComplexVector out(2 * kf);
  for (int m = 0; m < kf; ++m) {
    out[m] = c[m][0];
    out[kf + m] = c[m][1];
  }
  return out;
}

inline DofMap number_traces(const Mesh& mesh, const ReferenceBasis& rb, const ProblemData& data) {
  DofMap dm;
  dm.k = rb.k;
  const int kf = rb.face_dim();
  const int nf = mesh.num_faces();
  dm.uhat.assign(nf, -1);
  dm.vhat.assign(nf, -1);
  dm.uhat_fixed.assign(nf, {});
  dm.vhat_fixed.assign(nf, {});
  for (int f = 0; f < nf; ++f) {
    const FaceKind kind = mesh.faces[f].kind;
    if (kind == FaceKind::elasticBoundary) {
      dm.uhat_fixed[f] = data.elastic_dirichlet ? project_face_vector(mesh, f, rb, data.elastic_dirichlet)
                                                : ComplexVector::Zero(2 * kf);
    } else if (has_elastic_trace(kind)) {
      dm.uhat[f] = dm.size;
      dm.size += 2 * kf;
    }
    if (kind == FaceKind::gammaAD) {
      dm.vhat_fixed[f] = data.dirichlet ? project_face_scalar(mesh, f, rb, data.dirichlet)
                                        : ComplexVector::Zero(kf);
    } else if (has_acoustic_trace(kind)) {
      dm.vhat[f] = dm.size;
      dm.size += kf;
    }
  }
  return dm;
}

/// Local trace vector of an element from the global solution.
inline ComplexVector gather_traces(const Mesh& mesh, const DofMap& dm, int element,
                                   const ComplexVector& x) {
  const bool elastic = mesh.triangles[element].domain == Subdomain::elastic;
  const int block = (elastic ? 2 : 1) * dm.face_modes();
  ComplexVector out(3 * block);
  for (int j = 0; j < 3; ++j) {
    const int f = mesh.element_faces[element][j];
    const int start = elastic ? dm.uhat[f] : dm.vhat[f];
    if (start >= 0)
      out.segment(j * block, block) = x.segment(start, block);
    else
      out.segment(j * block, block) = elastic ? dm.uhat_fixed[f] : dm.vhat_fixed[f];
  }
  return out;
}

/// Condensed local systems for every element.
inline std::vector<LocalSystem> assemble_locals(const Mesh& mesh, const ReferenceBasis& rb,
                                                const ModelParams& params,
                                                const ProblemData& data) {
  std::vector<LocalSystem> locals;
  locals.reserve(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementSpaces es = build_element_spaces(mesh, e, rb);
    locals.push_back(assemble_local(es, params, data.elastic_source, data.acoustic_source));
  }
  return locals;
}

namespace detail {

/// Data terms and the interface coupling of the trace rows. Trace unknowns and
/// rows are shifted by `off` (nonzero when volume unknowns come first).
inline void add_face_terms(const Mesh& mesh, const ReferenceBasis& rb, const ModelParams& params,
                           const ProblemData& data, const DofMap& dm, int off,
                           std::vector<Eigen::Triplet<Complex>>& triplets, ComplexVector& rhs) {
  const int kf = rb.face_dim();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.kind == FaceKind::gammaAN && data.neumann) {
      const Vec2 nA = face.normal;  // sides[0] is the acoustic element
      const ComplexVector g =
          project_face_scalar(mesh, f, rb, [&](const Vec2& x) { return data.neumann(x, nA); });
      rhs.segment(off + dm.vhat[f], kf) += g;
    }
    if (face.kind != FaceKind::gamma) continue;
    const Vec2 nE = face.normal;
    const Vec2 nA = -nE;
    const Complex rs = params.rhoF * params.s;
    for (int c = 0; c < 2; ++c)
      for (int m = 0; m < kf; ++m) {
        triplets.emplace_back(off + dm.uhat[f] + c * kf + m, off + dm.vhat[f] + m, rs * nA[c]);
        triplets.emplace_back(off + dm.vhat[f] + m, off + dm.uhat[f] + c * kf + m, -params.s * nE[c]);
      }
    if (data.incident) {
      const ComplexVector vinc = project_face_scalar(mesh, f, rb, data.incident);
      for (int c = 0; c < 2; ++c) rhs.segment(off + dm.uhat[f] + c * kf, kf) -= rs * nA[c] * vinc;
    }
    if (data.interface_vector)
      rhs.segment(off + dm.uhat[f], 2 * kf) += project_face_vector(
          mesh, f, rb, [&](const Vec2& x) { return data.interface_vector(x, nE); });
    if (data.incident_gradient)
      rhs.segment(off + dm.vhat[f], kf) -= project_face_scalar(mesh, f, rb, [&](const Vec2& x) {
        const CVec2 g = data.incident_gradient(x);
        return g[0] * nA[0] + g[1] * nA[1];
      });
    if (data.interface_scalar)
      rhs.segment(off + dm.vhat[f], kf) += project_face_scalar(
          mesh, f, rb, [&](const Vec2& x) { return data.interface_scalar(x, nE); });
  }
}

/// First global row (or -1) and sign with which an element's flux moments on
/// its local face j enter the trace equations.
inline std::pair<int, double> flux_row(const Mesh& mesh, const DofMap& dm, int element, int j) {
  const int f = mesh.element_faces[element][j];
  const FaceKind kind = mesh.faces[f].kind;
  if (mesh.triangles[element].domain == Subdomain::elastic) {
    if (kind == FaceKind::interiorE) return {dm.uhat[f], 1.0};
    if (kind == FaceKind::gamma) return {dm.uhat[f], -1.0};
    return {-1, 0.0};
  }
  if (kind == FaceKind::interiorA || kind == FaceKind::gammaAN || kind == FaceKind::gamma)
    return {dm.vhat[f], 1.0};
  return {-1, 0.0};
}

/// Global column (or -1) of every local trace unknown, and the prescribed
/// values of the fixed ones.
inline std::pair<std::vector<int>, ComplexVector> trace_columns(const Mesh& mesh, const DofMap& dm,
                                                                int element, int block) {
  const bool elastic = mesh.triangles[element].domain == Subdomain::elastic;
  std::vector<int> col(3 * block, -1);
  ComplexVector fixed = ComplexVector::Zero(3 * block);
  for (int j = 0; j < 3; ++j) {
    const int f = mesh.element_faces[element][j];
    const int start = elastic ? dm.uhat[f] : dm.vhat[f];
    for (int i = 0; i < block; ++i) {
      if (start >= 0)
        col[j * block + i] = start + i;
      else
        fixed[j * block + i] = elastic ? dm.uhat_fixed[f][i] : dm.vhat_fixed[f][i];
    }
  }
  return {col, fixed};
}

} // namespace detail

inline SkeletonSystem build_skeleton(const Mesh& mesh, const std::vector<LocalSystem>& locals,
                                     const ReferenceBasis& rb, const ModelParams& params,
                                     const ProblemData& data) {
  check_hypothesis(params);
  if (static_cast<int>(locals.size()) != mesh.num_elements())
    throw Error("missing local system: got " + std::to_string(locals.size()) + " for " +
                std::to_string(mesh.num_elements()) + " elements");
  validate(mesh);

  SkeletonSystem sys;
  sys.dofs = number_traces(mesh, rb, data);
  const DofMap& dm = sys.dofs;
  const int kf = rb.face_dim();
  const int n = dm.size;
  sys.rhs = ComplexVector::Zero(n);
  std::vector<Eigen::Triplet<Complex>> triplets;

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const LocalSystem& ls = locals[e];
    if (ls.element != e || ls.kind != mesh.triangles[e].domain)
      throw Error("local system does not match element " + std::to_string(e));
    const bool elastic = ls.kind == Subdomain::elastic;
    const int block = ls.face_block;
    if (block != (elastic ? 2 : 1) * kf)
      throw Error("local system of element " + std::to_string(e) + " has the wrong degree");

    const auto [col, fixed] = detail::trace_columns(mesh, dm, e, block);
    for (int j = 0; j < 3; ++j) {
      const auto [row0, sign] = detail::flux_row(mesh, dm, e, j);
      if (row0 < 0) continue;
      for (int i = 0; i < block; ++i) {
        const int li = j * block + i;
        const int row = row0 + i;
        Complex rhs = -sign * ls.rhs_trace[li];
        for (int l = 0; l < ls.trace_dim; ++l) {
          const Complex a = sign * ls.condensed(li, l);
          if (col[l] >= 0)
            triplets.emplace_back(row, col[l], a);
          else
            rhs -= a * fixed[l];
        }
        sys.rhs[row] += rhs;
      }
    }
  }

  detail::add_face_terms(mesh, rb, params, data, dm, 0, triplets, sys.rhs);

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

struct SkeletonSolve {
  ComplexVector traces;
  double relative_residual = 0.0;
};

/// Face owning a global trace index (for diagnostics).
inline int face_of_dof(const DofMap& dm, int dof) {
  for (std::size_t f = 0; f < dm.uhat.size(); ++f) {
    if (dm.uhat[f] >= 0 && dof >= dm.uhat[f] && dof < dm.uhat[f] + 2 * dm.face_modes())
      return static_cast<int>(f);
    if (dm.vhat[f] >= 0 && dof >= dm.vhat[f] && dof < dm.vhat[f] + dm.face_modes())
      return static_cast<int>(f);
  }
  return -1;
}

/// Diagnostic for a failed factorisation: first column without entries, if any.
inline std::string singular_diagnostics(const SkeletonSystem& sys) {
  std::ostringstream os;
  for (Eigen::Index j = 0; j < sys.matrix.outerSize(); ++j) {
    double colmax = 0.0;
    for (SparseMatrix::InnerIterator it(sys.matrix, j); it; ++it) colmax = std::max(colmax, std::abs(it.value()));
    if (colmax == 0.0) {
      os << "; empty column " << j << " (face " << face_of_dof(sys.dofs, static_cast<int>(j)) << ")";
      break;
    }
  }
  return os.str();
}

inline SkeletonSolve solve_skeleton(const SkeletonSystem& sys) {
  SkeletonSolve out;
  const Eigen::Index n = sys.matrix.rows();
  if (n == 0) {
    out.traces = ComplexVector::Zero(0);
    return out;
  }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(sys.matrix);
  if (lu.info() != Eigen::Success)
    throw SingularSystemError("discrete system singular: " + lu.lastErrorMessage() +
                              singular_diagnostics(sys));
  out.traces = lu.solve(sys.rhs);
  if (lu.info() != Eigen::Success || !out.traces.allFinite())
    throw SingularSystemError("discrete system singular: solve produced no finite solution" +
                              singular_diagnostics(sys));
  const double bnorm = sys.rhs.norm();
  const ComplexVector r = sys.matrix * out.traces - sys.rhs;
  out.relative_residual = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
  return out;
}

inline FieldSolution recover_fields(const Mesh& mesh, const std::vector<LocalSystem>& locals,
                                    const DofMap& dm, const ComplexVector& traces) {
  FieldSolution sol;
  sol.k = dm.k;
  const int kf = dm.face_modes();
  sol.volume.resize(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e)
    sol.volume[e] = locals[e].lift_volume(gather_traces(mesh, dm, e, traces));
  sol.uhat.resize(mesh.num_faces());
  sol.vhat.resize(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (dm.uhat[f] >= 0) sol.uhat[f] = traces.segment(dm.uhat[f], 2 * kf);
    else if (dm.uhat_fixed[f].size()) sol.uhat[f] = dm.uhat_fixed[f];
    if (dm.vhat[f] >= 0) sol.vhat[f] = traces.segment(dm.vhat[f], kf);
    else if (dm.vhat_fixed[f].size()) sol.vhat[f] = dm.vhat_fixed[f];
  }
  return sol;
}

/// Matrix Market (coordinate, complex, general) dump of the skeleton matrix.
inline void dump_matrix_market(const SkeletonSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix coordinate complex general\n"
      << sys.matrix.rows() << " " << sys.matrix.cols() << " " << sys.matrix.nonZeros() << "\n";
  out.precision(17);
  for (int j = 0; j < sys.matrix.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(sys.matrix, j); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value().real() << " " << it.value().imag() << "\n";
  if (!out) throw Error("cannot write '" + path + "'");
}

/// Assembled and solved problem with everything needed for post-processing.
struct HdgSolution {
  std::vector<LocalSystem> locals;
  SkeletonSystem system;
  SkeletonSolve solve;
  FieldSolution fields;
};

inline HdgSolution solve_problem(const Mesh& mesh, const ReferenceBasis& rb,
                                 const ModelParams& params, const ProblemData& data) {
  check_hypothesis(params);
  HdgSolution out;
  out.locals = assemble_locals(mesh, rb, params, data);
  out.system = build_skeleton(mesh, out.locals, rb, params, data);
  out.solve = solve_skeleton(out.system);
  out.fields = recover_fields(mesh, out.locals, out.system.dofs, out.solve.traces);
  return out;
}

} // namespace hdg
