#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aniso/core.hpp"
#include "aniso/dofmap.hpp"
#include "aniso/mesh.hpp"

namespace aniso {

/// Anisotropy ratio of a(u,v) = (u_x, v_x) + epsilon (u_y, v_y).
struct ProblemConfig {
  double epsilon = 1.0;
};

/// Area and the constant gradients of the three P1 hat functions on a triangle.
struct ElementGeometry {
  double area = 0.0;
  std::array<double, 3> grad_x{};  // grad_x[k] = (y_{k+1} - y_{k+2}) / (2|K|)
  std::array<double, 3> grad_y{};  // grad_y[k] = (x_{k+2} - x_{k+1}) / (2|K|)
};

inline ElementGeometry element_geometry(const Mesh& m, int t) {
  const auto& tri = m.triangles[t];
  const Vec2& p0 = m.vertices[tri[0]];
  const Vec2& p1 = m.vertices[tri[1]];
  const Vec2& p2 = m.vertices[tri[2]];
  const double two_a = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  ElementGeometry g;
  g.area = 0.5 * two_a;
  const std::array<const Vec2*, 3> p = {&p0, &p1, &p2};
  for (int k = 0; k < 3; ++k) {
    const Vec2& a = *p[(k + 1) % 3];
    const Vec2& b = *p[(k + 2) % 3];
    g.grad_x[k] = (a.y - b.y) / two_a;
    g.grad_y[k] = (b.x - a.x) / two_a;
  }
  return g;
}

/// delta_E y for the edge running from triangle vertex slot e to slot (e+1)%3;
/// the opposite vertex is slot (e+2)%3. With this sign the per-element
/// derivative identity reads  dv/dx|_K = sum_e delta_y(e) * v[(e+2)%3].
inline double delta_y(const Mesh& m, int t, int e) {
  const auto& tri = m.triangles[t];
  const double area = signed_area(m, t);
  if (!(std::abs(area) > 1e-14 * m.h_char * m.h_char))
    throw std::runtime_error("delta_y: degenerate triangle " + std::to_string(t));
  const double yi = m.vertices[tri[e]].y;
  const double yj = m.vertices[tri[(e + 1) % 3]].y;
  return (yi - yj) / (2.0 * area);
}

namespace detail {
inline void check_not_degenerate(const Mesh& m, int t, double area) {
  if (!(area > 1e-14 * m.h_char * m.h_char))
    throw std::runtime_error("degenerate triangle " + std::to_string(t) + " (area " +
                             std::to_string(area) + ")");
}
}  // namespace detail

/// Stiffness matrix of a(u,v) on the given dofs. P1 gradients are constant per
/// element, so the per-element integration is exact.
inline SparseMatrix assemble_stiffness(const Mesh& mesh, const ProblemConfig& cfg,
                                       const DofMap& dofs) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("ProblemConfig: epsilon must be > 0");
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(9) * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    detail::check_not_degenerate(mesh, t, g.area);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int gi = dofs.dof(tri[i]);
      if (gi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int gj = dofs.dof(tri[j]);
        if (gj < 0) continue;
        const double v =
            g.area * (g.grad_x[i] * g.grad_x[j] + cfg.epsilon * g.grad_y[i] * g.grad_y[j]);
        trip.emplace_back(gi, gj, v);
      }
    }
  }
  SparseMatrix a(dofs.size(), dofs.size());
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

/// Mass matrix; element matrix |K|/12 * (2 on the diagonal, 1 off).
inline SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(9) * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double area = signed_area(mesh, t);
    detail::check_not_degenerate(mesh, t, area);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int gi = dofs.dof(tri[i]);
      if (gi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int gj = dofs.dof(tri[j]);
        if (gj < 0) continue;
        trip.emplace_back(gi, gj, area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SparseMatrix m(dofs.size(), dofs.size());
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

/// Load vector for the constant source f.
inline Vector assemble_load(const Mesh& mesh, const DofMap& dofs, double f = 1.0) {
  Vector b = Vector::Zero(dofs.size());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double area = signed_area(mesh, t);
    for (int k = 0; k < 3; ++k) {
      const int g = dofs.dof(mesh.triangles[t][k]);
      if (g >= 0) b[g] += f * area / 3.0;
    }
  }
  return b;
}

/// sqrt(v' A v). A slightly negative quadratic form beyond roundoff reports a
/// non-SPD matrix.
inline double energy_norm(const SparseMatrix& a, const Vector& v) {
  if (a.rows() != v.size() || a.cols() != v.size())
    throw std::invalid_argument("energy_norm: dimension mismatch");
  const double q = v.dot(a * v);
  if (q < -1e-12 * std::max(1.0, v.squaredNorm()))
    throw std::runtime_error("energy_norm: v'Av < 0, matrix is not SPD");
  return std::sqrt(std::max(q, 0.0));
}

/// Piecewise-constant gradient field of a P1 function given by nodal values.
struct GradientField {
  std::vector<double> gx, gy, area;

  double norm_x_sq() const {
    double s = 0.0;
    for (std::size_t t = 0; t < gx.size(); ++t) s += area[t] * gx[t] * gx[t];
    return s;
  }
  double norm_y_sq() const {
    double s = 0.0;
    for (std::size_t t = 0; t < gy.size(); ++t) s += area[t] * gy[t] * gy[t];
    return s;
  }
  double h1_sq() const { return norm_x_sq() + norm_y_sq(); }
};

inline GradientField piecewise_gradients(const Mesh& mesh, const std::vector<double>& nodal) {
  GradientField f;
  const int nt = mesh.triangle_count();
  f.gx.resize(nt);
  f.gy.resize(nt);
  f.area.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < 3; ++k) {
      gx += nodal[tri[k]] * g.grad_x[k];
      gy += nodal[tri[k]] * g.grad_y[k];
    }
    f.gx[t] = gx;
    f.gy[t] = gy;
    f.area[t] = g.area;
  }
  return f;
}

/// Exact integral of the square of the P1 function with the given nodal values.
inline double l2_norm_sq(const Mesh& mesh, const std::vector<double>& nodal) {
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = signed_area(mesh, t);
    const double v0 = nodal[tri[0]], v1 = nodal[tri[1]], v2 = nodal[tri[2]];
    const double sum = v0 + v1 + v2;
    s += area / 12.0 * (sum * sum + v0 * v0 + v1 * v1 + v2 * v2);
  }
  return s;
}

}  // namespace aniso
