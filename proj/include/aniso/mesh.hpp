#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aniso/core.hpp"

namespace aniso {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Conforming triangulation of a (possibly rotated) square domain.
/// Immutable after construction; triangles are counterclockwise.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::uint8_t> boundary;  // 1 iff vertex lies on the domain boundary
  double h_char = 0.0;                 // characteristic mesh size
  double omega = 0.0;                  // rotation angle; 0 for loaded meshes

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

struct MeshSpec {
  int n = 1;          // squares per side
  double omega = 0.0; // rotation angle in [0, pi]
};

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

inline double signed_area(const Mesh& m, int t) {
  const auto& tri = m.triangles[t];
  return signed_area(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]);
}

inline double triangle_diameter(const Mesh& m, int t) {
  const auto& tri = m.triangles[t];
  double d = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Vec2& p = m.vertices[tri[e]];
    const Vec2& q = m.vertices[tri[(e + 1) % 3]];
    d = std::max(d, std::hypot(q.x - p.x, q.y - p.y));
  }
  return d;
}

inline double max_triangle_diameter(const Mesh& m) {
  double d = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) d = std::max(d, triangle_diameter(m, t));
  return d;
}

inline std::pair<double, double> y_extent(const Mesh& m) {
  double lo = m.vertices.empty() ? 0.0 : m.vertices[0].y;
  double hi = lo;
  for (const auto& v : m.vertices) {
    lo = std::min(lo, v.y);
    hi = std::max(hi, v.y);
  }
  return {lo, hi};
}

/// Structural checks shared by the loader and the generators: index ranges,
/// counterclockwise orientation, no degenerate triangles.
inline void validate_mesh(const Mesh& m) {
  const int nv = m.vertex_count();
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv)
        throw std::runtime_error("triangle " + std::to_string(t) + ": vertex index out of range");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw std::runtime_error("triangle " + std::to_string(t) + ": repeated vertex index");
    const double a = signed_area(m, t);
    if (a < 0.0)
      throw std::runtime_error("triangle " + std::to_string(t) +
                               " is clockwise; counterclockwise orientation required");
    if (a == 0.0)
      throw std::runtime_error("triangle " + std::to_string(t) + " is degenerate (zero area)");
  }
}

/// N x N squares on (-1,1)^2, each square split along its lower-left to
/// upper-right diagonal, then the whole mesh rotated by omega around the
/// origin. h_char is the diagonal of one small square.
inline Mesh build_rotated_uniform(const MeshSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("MeshSpec: N must be >= 1");
  if (!(spec.omega >= 0.0 && spec.omega <= kPi))
    throw std::invalid_argument("MeshSpec: omega must be in [0, pi]");

  const int n = spec.n;
  const double s = 2.0 / n;
  const double c = std::cos(spec.omega);
  const double sn = std::sin(spec.omega);

  Mesh m;
  m.omega = spec.omega;
  m.h_char = s * std::sqrt(2.0);
  m.vertices.resize(static_cast<std::size_t>(n + 1) * (n + 1));
  m.boundary.assign(m.vertices.size(), 0);

  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x0 = -1.0 + i * s;
      const double y0 = -1.0 + j * s;
      const int v = j * (n + 1) + i;
      m.vertices[v] = {x0 * c - y0 * sn, x0 * sn + y0 * c};
      if (i == 0 || i == n || j == 0 || j == n) m.boundary[v] = 1;
    }
  }

  m.triangles.reserve(static_cast<std::size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = j * (n + 1) + i;
      const int b = a + 1;
      const int d = a + (n + 1);
      const int cc = d + 1;
      m.triangles.push_back({a, b, cc});
      m.triangles.push_back({a, cc, d});
    }
  }
  return m;
}

namespace detail {
inline std::runtime_error parse_error(int line, const std::string& what) {
  return std::runtime_error("mesh parse error at line " + std::to_string(line) + ": " + what);
}

/// Boundary flags from connectivity: a vertex is boundary iff it lies on an
/// edge shared by exactly one triangle.
inline std::vector<std::uint8_t> boundary_from_edges(const std::vector<std::array<int, 3>>& tris,
                                                     int nv) {
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& tri : tris) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e];
      int b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_use[{a, b}];
    }
  }
  std::vector<std::uint8_t> flags(nv, 0);
  for (const auto& [edge, uses] : edge_use) {
    if (uses == 1) {
      flags[edge.first] = 1;
      flags[edge.second] = 1;
    }
  }
  return flags;
}
}  // namespace detail

/// Text format: "<nv> <nt>", nv lines "x y b", nt lines "i0 i1 i2".
inline std::string save_mesh(const Mesh& m) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d %d\n", m.vertex_count(), m.triangle_count());
  out += buf;
  for (int v = 0; v < m.vertex_count(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", m.vertices[v].x, m.vertices[v].y,
                  static_cast<int>(m.boundary[v]));
    out += buf;
  }
  for (const auto& tri : m.triangles) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", tri[0], tri[1], tri[2]);
    out += buf;
  }
  return out;
}

inline Mesh load_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    ++lineno;
    return false;
  };

  if (!next_line()) throw detail::parse_error(1, "empty input, expected \"<nv> <nt>\"");
  int nv = 0, nt = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> nv >> nt) || nv < 3 || nt < 1)
      throw detail::parse_error(lineno, "expected counts \"<nv> <nt>\" with nv >= 3, nt >= 1");
  }

  Mesh m;
  m.vertices.resize(nv);
  m.boundary.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    if (!next_line()) throw detail::parse_error(lineno, "unexpected end of input in vertex list");
    std::istringstream ls(line);
    double x, y;
    int b;
    if (!(ls >> x >> y >> b) || (b != 0 && b != 1))
      throw detail::parse_error(lineno, "expected vertex line \"x y b\" with b in {0,1}");
    m.vertices[v] = {x, y};
  }
  m.triangles.resize(nt);
  for (int t = 0; t < nt; ++t) {
    if (!next_line()) throw detail::parse_error(lineno, "unexpected end of input in triangle list");
    std::istringstream ls(line);
    int i0, i1, i2;
    if (!(ls >> i0 >> i1 >> i2))
      throw detail::parse_error(lineno, "expected triangle line \"i0 i1 i2\"");
    m.triangles[t] = {i0, i1, i2};
  }

  validate_mesh(m);
  m.boundary = detail::boundary_from_edges(m.triangles, nv);
  m.h_char = max_triangle_diameter(m);
  m.omega = 0.0;
  return m;
}

/// Displaces interior vertices by a seeded pseudo-random offset of norm at
/// most amplitude*h_char. Offsets that would flip an incident triangle are
/// halved, up to 10 times per vertex.
inline Mesh jitter_interior(const Mesh& mesh, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude <= 0.3))
    throw std::invalid_argument("jitter amplitude must be in [0, 0.3]");

  std::vector<std::vector<int>> incident(mesh.vertex_count());
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k) incident[mesh.triangles[t][k]].push_back(t);

  Mesh out = mesh;
  Rng rng(seed);
  const double amin = 1e-12 * mesh.h_char * mesh.h_char;

  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (mesh.boundary[v]) continue;
    const double r = amplitude * mesh.h_char * rng.unit();
    const double phi = 2.0 * kPi * rng.unit();
    double dx = r * std::cos(phi);
    double dy = r * std::sin(phi);
    const Vec2 orig = out.vertices[v];
    bool placed = false;
    for (int attempt = 0; attempt <= 10; ++attempt) {
      out.vertices[v] = {orig.x + dx, orig.y + dy};
      bool ok = true;
      for (int t : incident[v]) {
        if (signed_area(out, t) <= amin) {
          ok = false;
          break;
        }
      }
      if (ok) {
        placed = true;
        break;
      }
      dx *= 0.5;
      dy *= 0.5;
    }
    if (!placed) {
      out.vertices[v] = orig;
      throw std::runtime_error("jitter: could not preserve orientation at vertex " +
                               std::to_string(v));
    }
  }
  return out;
}

}  // namespace aniso
