#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aniso/dofmap.hpp"
#include "aniso/mesh.hpp"

namespace aniso {

/// Overlapping horizontal strips along y with a piecewise-linear partition of
/// unity theta_i. The literal index range 1..L leaves sum(theta) < 1 near the
/// top and bottom of the domain, so indices run over 0..L+1; blocks[i] holds
/// the interior dofs whose basis-function support lies in the closure of the
/// i-th strip neighborhood.
struct StripDecomposition {
  double y_min = 0.0;
  double y_max = 0.0;
  double width = 0.0;
  int strip_count = 0;                  // L = floor((y_max - y_min) / width)
  std::vector<std::vector<int>> blocks; // indexed 0 .. L+1

  int index_count() const { return static_cast<int>(blocks.size()); }

  /// Hat centered at y_min + i*width with support width 2*width; constant in x.
  double theta(int i, double y) const {
    const double q = (y - y_min) / width - static_cast<double>(i);
    return std::max(0.0, 1.0 - std::abs(q));
  }
};

inline StripDecomposition build_strips(const Mesh& mesh, const DofMap& dofs, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("build_strips: width must be > 0");
  auto [y_min, y_max] = y_extent(mesh);
  const double extent = y_max - y_min;
  if (extent / width > 1e6) throw std::invalid_argument("build_strips: width too small for mesh");

  StripDecomposition sd;
  sd.y_min = y_min;
  sd.y_max = y_max;
  sd.width = width;
  sd.strip_count = static_cast<int>(std::floor(extent / width));
  const int top = sd.strip_count + 1;
  sd.blocks.assign(top + 1, {});

  std::vector<std::vector<int>> incident(mesh.vertex_count());
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k) incident[mesh.triangles[t][k]].push_back(t);

  // Triangle tau belongs to the strip set T_i iff some vertex of tau has
  // y - y_min within [(i-1) width, (i+1) width].
  auto in_strip_set = [&](int t, int i) {
    const double center = y_min + i * width;
    for (int k = 0; k < 3; ++k)
      if (std::abs(mesh.vertices[mesh.triangles[t][k]].y - center) <= width) return true;
    return false;
  };

  std::vector<int> uncovered;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const int d = dofs.dof(v);
    if (d < 0) continue;
    const double tv = mesh.vertices[v].y - y_min;
    double reach = 0.0;  // largest |y - y_v| among vertices of incident triangles
    for (int t : incident[v])
      for (int k = 0; k < 3; ++k)
        reach = std::max(reach, std::abs(mesh.vertices[mesh.triangles[t][k]].y - y_min - tv));
    const int lo = std::max(0, static_cast<int>(std::floor((tv - width - reach) / width)));
    const int hi = std::min(top, static_cast<int>(std::ceil((tv + width + reach) / width)));
    bool covered = false;
    for (int i = lo; i <= hi; ++i) {
      bool member = true;
      for (int t : incident[v]) {
        if (!in_strip_set(t, i)) {
          member = false;
          break;
        }
      }
      if (member) {
        sd.blocks[i].push_back(d);
        covered = true;
      }
    }
    if (!covered) uncovered.push_back(v);
  }

  // Any dof left uncovered (possible on irregular meshes) joins the block
  // whose strip center is nearest; the subspace sum must equal the whole space.
  for (int v : uncovered) {
    const double tv = mesh.vertices[v].y - y_min;
    const int i = std::clamp(static_cast<int>(std::lround(tv / width)), 0, top);
    sd.blocks[i].push_back(dofs.dof(v));
  }

  bool any = false;
  for (auto& blk : sd.blocks) {
    std::sort(blk.begin(), blk.end());
    any = any || !blk.empty();
  }
  if (!any) throw std::runtime_error("build_strips: all blocks empty");
  return sd;
}

}  // namespace aniso
