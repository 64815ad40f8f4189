#pragma once

#include "hdg/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace hdg {

// Plain-text mesh format:
//
//   hdgmesh v1
//   vertices N
//   x y                (N lines)
//   triangles M
//   v0 v1 v2 E|A       (M lines)
//   faces F
//   v0 v1 kind         (F lines)

inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "hdgmesh v1\n";
  os << "vertices " << mesh.vertices.size() << "\n";
  char buf[96];
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v[0], v[1]);
    os << buf;
  }
  os << "triangles " << mesh.triangles.size() << "\n";
  for (const Triangle& t : mesh.triangles)
    os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' '
       << (t.domain == Subdomain::elastic ? 'E' : 'A') << "\n";
  os << "faces " << mesh.faces.size() << "\n";
  for (const Face& f : mesh.faces)
    os << f.vertices[0] << ' ' << f.vertices[1] << ' ' << to_string(f.kind) << "\n";
}

inline void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_mesh(os, mesh);
}

inline Mesh read_mesh(std::istream& is) {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "hdgmesh" || version != "v1") throw Error("not an 'hdgmesh v1' file");

  const auto section = [&](const char* name) {
    std::string word;
    long n = -1;
    is >> word >> n;
    if (!is || word != name || n < 0)
      throw Error(std::string("malformed mesh: expected section '") + name + "'");
    return static_cast<std::size_t>(n);
  };

  std::vector<Vec2> verts(section("vertices"));
  for (Vec2& v : verts)
    if (!(is >> v[0] >> v[1])) throw Error("malformed mesh: bad vertex line");

  std::vector<Triangle> tris(section("triangles"));
  for (Triangle& t : tris) {
    std::string dom;
    if (!(is >> t.v[0] >> t.v[1] >> t.v[2] >> dom) || (dom != "E" && dom != "A"))
      throw Error("malformed mesh: bad triangle line");
    t.domain = dom == "E" ? Subdomain::elastic : Subdomain::acoustic;
  }

  const std::size_t nf = section("faces");
  FaceTags declared;
  for (std::size_t i = 0; i < nf; ++i) {
    int a, b;
    std::string kind;
    if (!(is >> a >> b >> kind)) throw Error("malformed mesh: bad face line");
    declared[detail::edge_key(a, b)] = face_kind_from_string(kind);
  }

  Mesh m = assemble_mesh(std::move(verts), std::move(tris), declared);
  if (nf != 0) {
    if (declared.size() != m.faces.size())
      throw Error("malformed mesh: face section does not match the triangles");
    for (const Face& f : m.faces) {
      auto it = declared.find(detail::edge_key(f.vertices[0], f.vertices[1]));
      if (it == declared.end() || it->second != f.kind)
        throw Error("malformed mesh: face kind mismatch on edge " + std::to_string(f.vertices[0]) +
                    "-" + std::to_string(f.vertices[1]));
    }
  }
  validate(m);
  return m;
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open mesh file '" + path + "'");
  return read_mesh(is);
}

} // namespace hdg
