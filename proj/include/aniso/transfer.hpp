#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "aniso/assembly.hpp"
#include "aniso/hierarchy.hpp"
#include "aniso/linsolve.hpp"

namespace aniso {

/// Nodal interpolation V_H -> V_h as a (fine interior x coarse interior)
/// matrix: identity rows at coarse vertices, two 1/2 entries at midpoints
/// (entries to Dirichlet endpoints dropped).
inline SparseMatrix prolongation(const Hierarchy& h) {
  std::vector<Triplet> trip;
  trip.reserve(h.fine_dofs.size() * 2);
  for (int d = 0; d < h.coarse_dofs.size(); ++d) {
    const int v = h.coarse_dofs.vertex(d);
    const int f = h.fine_dofs.dof(v);
    trip.emplace_back(f, d, 1.0);
  }
  for (const auto& em : h.midpoints) {
    const int f = h.fine_dofs.dof(em.midpoint);
    if (f < 0) continue;
    for (int endpoint : {em.a, em.b}) {
      const int c = h.coarse_dofs.dof(endpoint);
      if (c >= 0) trip.emplace_back(f, c, 0.5);
    }
  }
  SparseMatrix p(h.fine_dofs.size(), h.coarse_dofs.size());
  p.setFromTriplets(trip.begin(), trip.end());
  p.makeCompressed();
  return p;
}

/// Nodal sampling of a fine function at the coarse vertices (I_H).
inline Vector interp_IH(const Hierarchy& h, const Vector& v_fine) {
  if (v_fine.size() != h.fine_dofs.size())
    throw std::invalid_argument("interp_IH: size mismatch");
  Vector out(h.coarse_dofs.size());
  for (int d = 0; d < h.coarse_dofs.size(); ++d)
    out[d] = v_fine[h.fine_dofs.dof(h.coarse_dofs.vertex(d))];
  return out;
}

/// Galerkin coarse operator P' A P; for the nested P1 spaces this coincides
/// with direct assembly on the coarse mesh.
inline SparseMatrix galerkin_coarse(const SparseMatrix& a_fine, const SparseMatrix& p) {
  const Eigen::SparseMatrix<double> pc = p;
  const Eigen::SparseMatrix<double> ac = a_fine;
  Eigen::SparseMatrix<double> ah = pc.transpose() * ac * pc;
  ah.makeCompressed();
  return SparseMatrix(ah);
}

/// Coarse-grid correction: holds P and a factorization of A_H = P'AP and
/// applies the a-orthogonal projection P_H v = P A_H^{-1} P' A v.
class CoarseCorrection {
 public:
  CoarseCorrection(const SparseMatrix& a_fine, SparseMatrix p)
      : p_(std::move(p)), ah_(galerkin_coarse(a_fine, p_)), chol_(ah_) {}

  const SparseMatrix& coarse_matrix() const { return ah_; }
  const SparseMatrix& prolongation_matrix() const { return p_; }

  /// P A_H^{-1} P' r  (the correction for a residual r).
  Vector correct(const Vector& residual) const {
    return p_ * chol_.solve(p_.transpose() * residual);
  }

  /// P_H v, the a-orthogonal projection onto the coarse space.
  Vector project(const SparseMatrix& a_fine, const Vector& v) const {
    return correct(a_fine * v);
  }

 private:
  SparseMatrix p_;
  SparseMatrix ah_;
  CholeskyFactor chol_;
};

}  // namespace aniso
