#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <utility>
#include <vector>

#include "aniso/dofmap.hpp"
#include "aniso/mesh.hpp"

namespace aniso {

struct EdgeMidpoint {
  int a = 0;         // coarse endpoint, a < b
  int b = 0;
  int midpoint = 0;  // fine vertex index
};

/// Coarse mesh, its regular refinement, and the bookkeeping connecting them:
/// per coarse triangle the four children (children[t][3] is the central one),
/// the edge-midpoint table, and interior dof maps on both levels. Coarse
/// vertex i and fine vertex i coincide.
struct Hierarchy {
  Mesh coarse;
  Mesh fine;
  std::vector<std::array<int, 4>> children;  // coarse triangle -> fine triangles
  std::vector<int> parent;                   // fine triangle -> coarse triangle
  std::vector<EdgeMidpoint> midpoints;       // ascending (a, b)
  DofMap coarse_dofs;
  DofMap fine_dofs;
};

/// Splits every coarse triangle into four congruent children through the edge
/// midpoints. Midpoint vertices are appended after the coarse vertices in
/// ascending order of their sorted endpoint pair.
inline Hierarchy refine_regular(const Mesh& coarse) {
  const int nvc = coarse.vertex_count();

  std::map<std::pair<int, int>, int> edge_use;  // sorted endpoints -> triangle count
  for (const auto& tri : coarse.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e];
      int b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_use[{a, b}];
    }
  }

  Mesh fine;
  fine.omega = coarse.omega;
  fine.h_char = coarse.h_char / 2.0;
  fine.vertices = coarse.vertices;
  fine.boundary = coarse.boundary;
  fine.vertices.reserve(nvc + edge_use.size());
  fine.boundary.reserve(nvc + edge_use.size());

  std::vector<EdgeMidpoint> midpoints;
  midpoints.reserve(edge_use.size());
  std::map<std::pair<int, int>, int> midpoint_of;
  for (const auto& [edge, uses] : edge_use) {  // std::map iterates keys in ascending order
    const int mid = fine.vertex_count();
    const Vec2& p = coarse.vertices[edge.first];
    const Vec2& q = coarse.vertices[edge.second];
    fine.vertices.push_back({0.5 * (p.x + q.x), 0.5 * (p.y + q.y)});
    fine.boundary.push_back(uses == 1 ? 1 : 0);
    midpoint_of[edge] = mid;
    midpoints.push_back({edge.first, edge.second, mid});
  }

  auto mid = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return midpoint_of.at({a, b});
  };

  Hierarchy h;
  fine.triangles.reserve(static_cast<std::size_t>(4) * coarse.triangle_count());
  h.children.resize(coarse.triangle_count());
  h.parent.resize(static_cast<std::size_t>(4) * coarse.triangle_count());
  for (int t = 0; t < coarse.triangle_count(); ++t) {
    const auto& tri = coarse.triangles[t];
    const int m01 = mid(tri[0], tri[1]);
    const int m12 = mid(tri[1], tri[2]);
    const int m20 = mid(tri[2], tri[0]);
    const std::array<std::array<int, 3>, 4> kids = {{
        {tri[0], m01, m20},  // corner children first,
        {tri[1], m12, m01},
        {tri[2], m20, m12},
        {m12, m20, m01},     // central child last
    }};
    for (int l = 0; l < 4; ++l) {
      const int ft = fine.triangle_count();
      fine.triangles.push_back(kids[l]);
      h.children[t][l] = ft;
      h.parent[ft] = t;
    }
  }

  h.coarse = coarse;
  h.fine = std::move(fine);
  h.midpoints = std::move(midpoints);
  h.coarse_dofs = DofMap::interior(h.coarse);
  h.fine_dofs = DofMap::interior(h.fine);
  return h;
}

/// Coarse mesh at n0 * 2^(level-1) squares per side plus one regular
/// refinement, so the fine mesh has n0 * 2^level squares per side.
inline Hierarchy hierarchy_at_level(int n0, double omega, int level) {
  if (level < 1) throw std::invalid_argument("hierarchy_at_level: level must be >= 1");
  const Mesh coarse = build_rotated_uniform({n0 << (level - 1), omega});
  return refine_regular(coarse);
}

/// Jittered variant: the base n0 mesh is jittered, then refined level times;
/// the hierarchy pairs the last two meshes in the chain.
inline Hierarchy jittered_hierarchy_at_level(int n0, double omega, double amplitude,
                                             std::uint64_t seed, int level) {
  if (level < 1) throw std::invalid_argument("jittered_hierarchy_at_level: level must be >= 1");
  Mesh mesh = jitter_interior(build_rotated_uniform({n0, omega}), amplitude, seed);
  for (int k = 1; k < level; ++k) mesh = refine_regular(mesh).fine;
  return refine_regular(mesh);
}

}  // namespace aniso
