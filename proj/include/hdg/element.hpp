#pragma once

#include "hdg/elastic_spaces.hpp"
#include "hdg/mesh.hpp"

#include <array>
#include <optional>

namespace hdg {

/// Quadrature data on one local face of an element, in the face's global
/// parametrisation t in [0, 1] from vertices[0] to vertices[1]. Both neighbours
/// therefore see the same points in the same order.
struct FaceQuadrature {
  int face = -1;
  int sign = 1;
  Vec2 normal;  // outward for this element
  double length = 0.0;
  std::vector<Vec2> points;
  RealVector weights;   // physical
  RealMatrix scalar;    // point x dim P_k, element scalar basis
  RealMatrix trace;     // point x (k+1), L2(F)-orthonormal face basis
  std::array<RealMatrix, 2> stress_normal;  // (S n)_c, point x stress function (elastic only)
};

/// Everything an element-level computation needs: geometry, volume tables and
/// the three face tables.
struct ElementSpaces {
  int element = -1;
  Subdomain domain = Subdomain::acoustic;
  const ReferenceBasis* basis = nullptr;
  AffineMap map;
  double diameter = 0.0;
  PhysicalTables volume;
  std::optional<StressBasis> stress;
  std::array<FaceQuadrature, 3> faces;

  int k() const { return basis->k; }
  int dim() const { return basis->dim(); }

  RealVector scalar_at(const Vec2& x) const {
    const Vec2 r = map.to_reference(x);
    RealVector v(dim());
    for (int m = 0; m < dim(); ++m) v[m] = basis->scalar[m](r);
    return v;
  }
};

inline ElementSpaces build_element_spaces(const Mesh& mesh, int element, const ReferenceBasis& rb) {
  const auto tri = mesh.corners(element);
  ElementSpaces es{element, mesh.triangles[element].domain, &rb, AffineMap(tri),
                   mesh.diameter(element), map_to_physical(rb, tri), std::nullopt, {}};
  if (es.domain == Subdomain::elastic) es.stress = build_stress_basis(rb, tri);

  const int d = rb.dim();
  const std::size_t nfq = rb.edge.size();
  for (int j = 0; j < 3; ++j) {
    FaceQuadrature& fq = es.faces[j];
    fq.face = mesh.element_faces[element][j];
    const Face& face = mesh.faces[fq.face];
    fq.sign = mesh.element_signs[element][j];
    fq.normal = fq.sign * face.normal;
    fq.length = face.length;
    const Vec2 a = mesh.vertices[face.vertices[0]], b = mesh.vertices[face.vertices[1]];
    fq.points.resize(nfq);
    fq.weights.resize(nfq);
    fq.scalar.resize(nfq, d);
    fq.trace = rb.face_values / std::sqrt(fq.length);
    std::vector<Vec2> ref(nfq);
    for (std::size_t q = 0; q < nfq; ++q) {
      fq.points[q] = a + rb.edge.points[q] * (b - a);
      fq.weights[q] = rb.edge.weights[q] * fq.length;
      ref[q] = es.map.to_reference(fq.points[q]);
      for (int m = 0; m < d; ++m) fq.scalar(q, m) = rb.scalar[m](ref[q]);
    }
    if (es.stress) {
      const int ns = es.stress->size();
      for (auto& m : fq.stress_normal) m.resize(nfq, ns);
      for (std::size_t q = 0; q < nfq; ++q) {
        const auto vals = stress_values(rb, *es.stress, es.map, fq.points[q]);
        for (int n = 0; n < ns; ++n) {
          const Vec2 sn = vals[n] * fq.normal;
          fq.stress_normal[0](q, n) = sn[0];
          fq.stress_normal[1](q, n) = sn[1];
        }
      }
    }
  }
  return es;
}

} // namespace hdg
