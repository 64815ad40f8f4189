#pragma once

#include "hdg/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hdg {

enum class Subdomain { elastic, acoustic };

enum class FaceKind { interiorE, interiorA, gamma, gammaAD, gammaAN, elasticBoundary };

inline const char* to_string(FaceKind kind) {
  switch (kind) {
  case FaceKind::interiorE: return "interiorE";
  case FaceKind::interiorA: return "interiorA";
  case FaceKind::gamma: return "gamma";
  case FaceKind::gammaAD: return "gammaAD";
  case FaceKind::gammaAN: return "gammaAN";
  case FaceKind::elasticBoundary: return "elasticBoundary";
  }
  return "?";
}

inline FaceKind face_kind_from_string(const std::string& name) {
  for (FaceKind k : {FaceKind::interiorE, FaceKind::interiorA, FaceKind::gamma, FaceKind::gammaAD,
                     FaceKind::gammaAN, FaceKind::elasticBoundary})
    if (name == to_string(k)) return k;
  throw Error("unknown face kind '" + name + "'");
}

/// True for faces that carry a displacement trace (elastic skeleton).
inline bool has_elastic_trace(FaceKind k) {
  return k == FaceKind::interiorE || k == FaceKind::gamma || k == FaceKind::elasticBoundary;
}

/// True for faces that carry an acoustic trace.
inline bool has_acoustic_trace(FaceKind k) {
  return k == FaceKind::interiorA || k == FaceKind::gamma || k == FaceKind::gammaAD ||
         k == FaceKind::gammaAN;
}

struct Box {
  Vec2 lo;
  Vec2 hi;

  double area() const { return (hi - lo).prod(); }
};

struct Triangle {
  std::array<int, 3> v;
  Subdomain domain;
};

/// One element adjacent to a face. `sign` is +1 when the face normal is the
/// element's outward normal and -1 otherwise.
struct FaceSide {
  int element;
  int local_face;
  int sign;
};

/// Mesh edge. Local face j of a triangle joins its vertices j and j+1.
/// The unit normal is the tangent rotated clockwise and is outward for sides[0];
/// on the interface sides[0] is the elastic element, so normal = n_E = -n_A.
struct Face {
  std::array<int, 2> vertices;
  FaceKind kind;
  Vec2 normal;
  double length;
  std::vector<FaceSide> sides;
};

struct FaceFrame {
  Vec2 midpoint;
  Vec2 tangent;
  Vec2 normal;
  double length;
};

/// Immutable triangulation of the elastic and acoustic subdomains.
class Mesh {
public:
  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  std::vector<Face> faces;
  std::vector<std::array<int, 3>> element_faces;
  std::vector<std::array<int, 3>> element_signs;
  double hE = 0.0;
  double hA = 0.0;

  int num_elements() const { return static_cast<int>(triangles.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  double h() const { return std::max(hE, hA); }

  int count(Subdomain d) const {
    return static_cast<int>(std::count_if(triangles.begin(), triangles.end(),
                                          [d](const Triangle& t) { return t.domain == d; }));
  }
  int count(FaceKind k) const {
    return static_cast<int>(
        std::count_if(faces.begin(), faces.end(), [k](const Face& f) { return f.kind == k; }));
  }

  std::array<Vec2, 3> corners(int element) const {
    const auto& t = triangles.at(element).v;
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }

  double area(int element) const {
    const auto p = corners(element);
    const Vec2 a = p[1] - p[0], b = p[2] - p[0];
    return 0.5 * (a[0] * b[1] - a[1] * b[0]);
  }

  double diameter(int element) const {
    const auto p = corners(element);
    return std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
  }

  /// Outward unit normal of `element` on its local face.
  Vec2 outward_normal(int element, int local_face) const {
    return element_signs[element][local_face] * faces[element_faces[element][local_face]].normal;
  }
};

inline FaceFrame face_geometry(const Mesh& mesh, int face_id) {
  if (face_id < 0 || face_id >= mesh.num_faces())
    throw Error("face index " + std::to_string(face_id) + " out of range");
  const Face& f = mesh.faces[face_id];
  const Vec2 a = mesh.vertices[f.vertices[0]], b = mesh.vertices[f.vertices[1]];
  FaceFrame fr;
  fr.midpoint = 0.5 * (a + b);
  fr.length = (b - a).norm();
  fr.tangent = (b - a) / fr.length;
  fr.normal = Vec2(fr.tangent[1], -fr.tangent[0]);
  return fr;
}

namespace detail {

inline std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

} // namespace detail

/// Tags for boundary faces, keyed by the sorted vertex pair.
using FaceTags = std::map<std::pair<int, int>, FaceKind>;

/// Build connectivity, orientation and face classification from triangles.
///
/// Interior faces are classified from their neighbours (same subdomain gives
/// interiorE/interiorA, mixed gives gamma). Boundary faces take their kind from
/// `tags`, defaulting to gammaAD on acoustic elements and elasticBoundary on
/// elastic ones. Triangles are reoriented counter-clockwise.
inline Mesh assemble_mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                          const FaceTags& tags = {}) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.triangles = std::move(triangles);
  const int ne = m.num_elements();
  for (auto& t : m.triangles) {
    for (int v : t.v)
      if (v < 0 || v >= static_cast<int>(m.vertices.size()))
        throw Error("triangle references vertex " + std::to_string(v) + " out of range");
    const Vec2 a = m.vertices[t.v[1]] - m.vertices[t.v[0]];
    const Vec2 b = m.vertices[t.v[2]] - m.vertices[t.v[0]];
    if (a[0] * b[1] - a[1] * b[0] < 0.0) std::swap(t.v[1], t.v[2]);
  }

  std::map<std::pair<int, int>, int> index;
  m.element_faces.assign(ne, {-1, -1, -1});
  m.element_signs.assign(ne, {0, 0, 0});
  for (int e = 0; e < ne; ++e) {
    const auto& t = m.triangles[e].v;
    for (int j = 0; j < 3; ++j) {
      const int a = t[j], b = t[(j + 1) % 3];
      const auto key = detail::edge_key(a, b);
      auto it = index.find(key);
      if (it == index.end()) {
        Face f;
        f.vertices = {a, b};
        f.kind = FaceKind::interiorA;
        f.sides.push_back({e, j, +1});
        index.emplace(key, m.num_faces());
        m.element_faces[e][j] = m.num_faces();
        m.faces.push_back(std::move(f));
      } else {
        Face& f = m.faces[it->second];
        if (f.sides.size() >= 2)
          throw Error("face shared by more than two triangles");
        f.sides.push_back({e, j, -1});
        m.element_faces[e][j] = it->second;
      }
    }
  }

  for (int fid = 0; fid < m.num_faces(); ++fid) {
    Face& f = m.faces[fid];
    if (f.sides.size() == 2) {
      const Subdomain d0 = m.triangles[f.sides[0].element].domain;
      const Subdomain d1 = m.triangles[f.sides[1].element].domain;
      if (d0 != d1) {
        f.kind = FaceKind::gamma;
        if (d0 == Subdomain::acoustic) {
          std::swap(f.sides[0], f.sides[1]);
          std::swap(f.vertices[0], f.vertices[1]);
          f.sides[0].sign = +1;
          f.sides[1].sign = -1;
        }
      } else {
        f.kind = d0 == Subdomain::elastic ? FaceKind::interiorE : FaceKind::interiorA;
      }
    } else {
      const Subdomain d = m.triangles[f.sides[0].element].domain;
      auto tag = tags.find(detail::edge_key(f.vertices[0], f.vertices[1]));
      f.kind = d == Subdomain::elastic ? FaceKind::elasticBoundary : FaceKind::gammaAD;
      if (tag != tags.end()) f.kind = tag->second;
    }
    const Vec2 a = m.vertices[f.vertices[0]], b = m.vertices[f.vertices[1]];
    f.length = (b - a).norm();
    f.normal = Vec2(b[1] - a[1], -(b[0] - a[0])) / f.length;
    for (const FaceSide& s : f.sides) m.element_signs[s.element][s.local_face] = s.sign;
  }

  for (int e = 0; e < ne; ++e) {
    double& h = m.triangles[e].domain == Subdomain::elastic ? m.hE : m.hA;
    h = std::max(h, m.diameter(e));
  }
  return m;
}

/// Check the structural invariants; throws Error on the first violation.
inline void validate(const Mesh& m) {
  const bool has_acoustic = m.count(Subdomain::acoustic) > 0;
  for (int e = 0; e < m.num_elements(); ++e) {
    const double d = m.diameter(e);
    if (!(m.area(e) > 1e-14 * d * d))
      throw Error("degenerate triangle " + std::to_string(e));
  }
  for (int fid = 0; fid < m.num_faces(); ++fid) {
    const Face& f = m.faces[fid];
    if (std::abs(f.normal.norm() - 1.0) > 1e-14) throw Error("non-unit face normal");
    const auto dom = [&](int s) { return m.triangles[f.sides[s].element].domain; };
    const std::string where = "face " + std::to_string(fid) + " (" + to_string(f.kind) + ")";
    switch (f.kind) {
    case FaceKind::interiorE:
    case FaceKind::interiorA: {
      const Subdomain want =
          f.kind == FaceKind::interiorE ? Subdomain::elastic : Subdomain::acoustic;
      if (f.sides.size() != 2 || dom(0) != want || dom(1) != want)
        throw Error("inconsistent face kind on " + where);
      break;
    }
    case FaceKind::gamma:
      if (f.sides.size() != 2 || dom(0) != Subdomain::elastic || dom(1) != Subdomain::acoustic)
        throw Error("interface face must join one elastic and one acoustic triangle: " + where);
      break;
    case FaceKind::gammaAD:
    case FaceKind::gammaAN:
      if (f.sides.size() != 1 || dom(0) != Subdomain::acoustic)
        throw Error("inconsistent face kind on " + where);
      break;
    case FaceKind::elasticBoundary:
      if (f.sides.size() != 1 || dom(0) != Subdomain::elastic)
        throw Error("inconsistent face kind on " + where);
      if (has_acoustic)
        throw Error("elastic boundary faces are only allowed without an acoustic region: " +
                    where);
      break;
    }
  }
}

struct GridOptions {
  /// Subdomain used when no inner box is given.
  Subdomain single_domain = Subdomain::acoustic;
  /// All outer acoustic boundary faces are Dirichlet when set.
  bool dirichlet_only = true;
  /// Otherwise, faces whose midpoint satisfies this predicate become Neumann.
  std::function<bool(const Vec2&)> neumann;
};

/// Structured triangulation of `outer` with `n_per_unit` cells per unit length,
/// each cell split along its (lo, hi) diagonal. Cells inside `inner` are elastic,
/// the rest acoustic; without `inner` every cell gets `opts.single_domain`.
inline Mesh build_structured_coupled(int n_per_unit, const Box& outer,
                                     const std::optional<Box>& inner = std::nullopt,
                                     const GridOptions& opts = {}) {
  if (n_per_unit < 1) throw Error("grid resolution must be positive");
  const double tol = 1e-9;
  const auto grid_index = [&](double coord, double origin) {
    const double g = (coord - origin) * n_per_unit;
    const double r = std::round(g);
    if (std::abs(g - r) > tol) return -1;
    return static_cast<int>(r);
  };
  const int nx = grid_index(outer.hi[0], outer.lo[0]);
  const int ny = grid_index(outer.hi[1], outer.lo[1]);
  if (nx <= 0 || ny <= 0) throw Error("outer box does not align with the grid");

  std::array<int, 4> in{0, 0, 0, 0};
  if (inner) {
    in = {grid_index(inner->lo[0], outer.lo[0]), grid_index(inner->lo[1], outer.lo[1]),
          grid_index(inner->hi[0], outer.lo[0]), grid_index(inner->hi[1], outer.lo[1])};
    const bool aligned = std::all_of(in.begin(), in.end(), [](int i) { return i >= 0; });
    if (!aligned || !(in[0] > 0 && in[1] > 0 && in[2] < nx && in[3] < ny && in[0] < in[2] &&
                      in[1] < in[3]))
      throw Error("interface not resolvable: inner box must lie strictly inside the outer box "
                  "on grid lines");
  }

  const double dx = (outer.hi[0] - outer.lo[0]) / nx;
  const double dy = (outer.hi[1] - outer.lo[1]) / ny;
  std::vector<Vec2> verts;
  verts.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.emplace_back(outer.lo[0] + i * dx, outer.lo[1] + j * dy);
  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<Triangle> tris;
  tris.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Subdomain d = opts.single_domain;
      if (inner) {
        const bool inside = i >= in[0] && i < in[2] && j >= in[1] && j < in[3];
        d = inside ? Subdomain::elastic : Subdomain::acoustic;
      }
      tris.push_back({{vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)}, d});
      tris.push_back({{vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)}, d});
    }

  FaceTags tags;
  if (!opts.dirichlet_only && opts.neumann) {
    const auto tag_edge = [&](int a, int b) {
      if (opts.neumann(0.5 * (verts[a] + verts[b])))
        tags[detail::edge_key(a, b)] = FaceKind::gammaAN;
    };
    for (int i = 0; i < nx; ++i) {
      tag_edge(vid(i, 0), vid(i + 1, 0));
      tag_edge(vid(i, ny), vid(i + 1, ny));
    }
    for (int j = 0; j < ny; ++j) {
      tag_edge(vid(0, j), vid(0, j + 1));
      tag_edge(vid(nx, j), vid(nx, j + 1));
    }
  }
  Mesh m = assemble_mesh(std::move(verts), std::move(tris), tags);
  validate(m);
  return m;
}

/// Uniform red refinement: every triangle is split into four similar ones
/// through its edge midpoints. Boundary face kinds are inherited by the halves.
inline Mesh refine(const Mesh& mesh) {
  std::vector<Vec2> verts = mesh.vertices;
  std::vector<int> midpoint(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& fv = mesh.faces[f].vertices;
    midpoint[f] = static_cast<int>(verts.size());
    verts.push_back(0.5 * (mesh.vertices[fv[0]] + mesh.vertices[fv[1]]));
  }
  FaceTags tags;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.sides.size() != 1) continue;
    tags[detail::edge_key(face.vertices[0], midpoint[f])] = face.kind;
    tags[detail::edge_key(midpoint[f], face.vertices[1])] = face.kind;
  }
  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.triangles.size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.triangles[e];
    const auto& ef = mesh.element_faces[e];
    // local face j joins v[j] and v[j+1]
    const int m01 = midpoint[ef[0]], m12 = midpoint[ef[1]], m20 = midpoint[ef[2]];
    tris.push_back({{t.v[0], m01, m20}, t.domain});
    tris.push_back({{m01, t.v[1], m12}, t.domain});
    tris.push_back({{m20, m12, t.v[2]}, t.domain});
    tris.push_back({{m01, m12, m20}, t.domain});
  }
  Mesh out = assemble_mesh(std::move(verts), std::move(tris), tags);
  validate(out);
  return out;
}

} // namespace hdg
