#pragma once

#include <stdexcept>
#include <vector>

#include "aniso/mesh.hpp"

namespace aniso {

/// Bijection between a subset of mesh vertices and degree-of-freedom indices,
/// ordered by ascending vertex index. The interior map eliminates Dirichlet
/// (boundary) vertices.
class DofMap {
 public:
  DofMap() = default;

  static DofMap interior(const Mesh& mesh) { return DofMap(mesh, true); }
  static DofMap all(const Mesh& mesh) { return DofMap(mesh, false); }

  int size() const { return static_cast<int>(vertex_of_dof_.size()); }
  int dof(int vertex) const { return dof_of_vertex_[vertex]; }  // -1 if eliminated
  int vertex(int dof) const { return vertex_of_dof_[dof]; }

 private:
  DofMap(const Mesh& mesh, bool interior_only) {
    dof_of_vertex_.assign(mesh.vertex_count(), -1);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (interior_only && mesh.boundary[v]) continue;
      dof_of_vertex_[v] = static_cast<int>(vertex_of_dof_.size());
      vertex_of_dof_.push_back(v);
    }
  }

  std::vector<int> dof_of_vertex_;
  std::vector<int> vertex_of_dof_;
};

/// Expands a dof vector to per-vertex nodal values, zero at eliminated vertices.
inline std::vector<double> nodal_values(const Mesh& mesh, const DofMap& dofs, const Vector& v) {
  if (v.size() != dofs.size()) throw std::invalid_argument("nodal_values: size mismatch");
  std::vector<double> out(mesh.vertex_count(), 0.0);
  for (int d = 0; d < dofs.size(); ++d) out[dofs.vertex(d)] = v[d];
  return out;
}

}  // namespace aniso
