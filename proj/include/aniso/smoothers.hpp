#pragma once

#include <Eigen/Cholesky>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "aniso/core.hpp"
#include "aniso/linsolve.hpp"
#include "aniso/strips.hpp"

namespace aniso {

enum class SmootherKind { point_gs, line_gs };
enum class SweepOrdering { forward, backward, symmetric };

struct SmootherConfig {
  SmootherKind kind = SmootherKind::point_gs;
  int sweeps = 1;
  SweepOrdering ordering = SweepOrdering::forward;
  const StripDecomposition* strips = nullptr;  // required for line_gs
};

namespace detail {

inline double row_dot(const SparseMatrix& a, int row, const Vector& x) {
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(a, row); it; ++it) s += it.value() * x[it.index()];
  return s;
}

inline void point_gs_pass(const SparseMatrix& a, const Vector& b, Vector& x, bool forward) {
  const int n = static_cast<int>(a.rows());
  for (int k = 0; k < n; ++k) {
    const int i = forward ? k : n - 1 - k;
    double diag = 0.0, off = 0.0;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      if (it.index() == i)
        diag = it.value();
      else
        off += it.value() * x[it.index()];
    }
    if (diag == 0.0)
      throw std::runtime_error("point Gauss-Seidel: zero diagonal at row " + std::to_string(i));
    x[i] = (b[i] - off) / diag;
  }
}

}  // namespace detail

/// One forward point Gauss-Seidel sweep in dof order.
inline void point_gs_apply(const SparseMatrix& a, const Vector& b, Vector& x) {
  detail::point_gs_pass(a, b, x, true);
}

/// Factorizations of the principal submatrices A[blk, blk] for the strip
/// blocks, dense up to 512 dofs and sparse above.
class BlockSolvers {
 public:
  BlockSolvers(const SparseMatrix& a, const StripDecomposition& strips) {
    std::vector<int> local(a.rows(), -1);
    for (const auto& blk : strips.blocks) {
      factors_.emplace_back();
      Factor& f = factors_.back();
      f.dofs = blk;
      const int nb = static_cast<int>(blk.size());
      if (nb == 0) continue;
      for (int k = 0; k < nb; ++k) local[blk[k]] = k;
      if (nb <= kDenseLimit) {
        Matrix sub = Matrix::Zero(nb, nb);
        for (int k = 0; k < nb; ++k)
          for (SparseMatrix::InnerIterator it(a, blk[k]); it; ++it)
            if (local[it.index()] >= 0) sub(k, local[it.index()]) = it.value();
        f.dense = std::make_unique<Eigen::LLT<Matrix>>(sub);
        if (f.dense->info() != Eigen::Success)
          throw std::runtime_error("block factorization failed (block not SPD?)");
      } else {
        std::vector<Triplet> trip;
        for (int k = 0; k < nb; ++k)
          for (SparseMatrix::InnerIterator it(a, blk[k]); it; ++it)
            if (local[it.index()] >= 0) trip.emplace_back(k, local[it.index()], it.value());
        SparseMatrix sub(nb, nb);
        sub.setFromTriplets(trip.begin(), trip.end());
        f.sparse = std::make_unique<CholeskyFactor>(sub);
      }
      for (int k = 0; k < nb; ++k) local[blk[k]] = -1;
    }
  }

  int block_count() const { return static_cast<int>(factors_.size()); }
  const std::vector<int>& block(int i) const { return factors_[i].dofs; }

  /// Solves the block-i system on the current residual of A x = b, updates x.
  void correct_block(const SparseMatrix& a, int i, const Vector& b, Vector& x) const {
    const Factor& f = factors_[i];
    const int nb = static_cast<int>(f.dofs.size());
    if (nb == 0) return;
    Vector r(nb);
    for (int k = 0; k < nb; ++k) r[k] = b[f.dofs[k]] - detail::row_dot(a, f.dofs[k], x);
    const Vector d = f.dense ? f.dense->solve(r) : f.sparse->solve(r);
    for (int k = 0; k < nb; ++k) x[f.dofs[k]] += d[k];
  }

  static constexpr int kDenseLimit = 512;

 private:
  struct Factor {
    std::vector<int> dofs;
    std::unique_ptr<Eigen::LLT<Matrix>> dense;
    std::unique_ptr<CholeskyFactor> sparse;
  };
  std::vector<Factor> factors_;
};

/// One multiplicative Schwarz sweep over the strip blocks in ascending order.
inline void line_gs_apply(const SparseMatrix& a, const Vector& b, Vector& x,
                          const BlockSolvers& blocks) {
  for (int i = 0; i < blocks.block_count(); ++i) blocks.correct_block(a, i, b, x);
}

/// Point or line (block) Gauss-Seidel with a fixed sweep pattern. Holds a
/// reference to A plus the cached block factorizations; applications are
/// const. The transposed application reverses the sweep direction, which
/// realizes the Euclidean transpose of the sweep operator.
class Smoother {
 public:
  Smoother(const SparseMatrix& a, SmootherConfig cfg) : a_(&a), cfg_(cfg) {
    if (cfg_.sweeps < 1) throw std::invalid_argument("Smoother: sweeps must be >= 1");
    if (cfg_.kind == SmootherKind::line_gs) {
      if (cfg_.strips == nullptr)
        throw std::invalid_argument("line Gauss-Seidel requires a StripDecomposition");
      bool any = false;
      for (const auto& blk : cfg_.strips->blocks) any = any || !blk.empty();
      if (!any) throw std::invalid_argument("line Gauss-Seidel: empty strip decomposition");
      blocks_ = std::make_shared<const BlockSolvers>(a, *cfg_.strips);
    } else {
      for (int i = 0; i < a.rows(); ++i) {
        if (a.coeff(i, i) == 0.0)
          throw std::runtime_error("point Gauss-Seidel: zero diagonal at row " +
                                   std::to_string(i));
      }
    }
  }

  const SparseMatrix& matrix() const { return *a_; }
  const SmootherConfig& config() const { return cfg_; }

  /// Applies the configured sweeps to A x = b, updating x in place.
  void sweep(const Vector& b, Vector& x) const { run(b, x, false); }

  /// Same with the transposed operator (reversed sweep direction).
  void sweep_transposed(const Vector& b, Vector& x) const { run(b, x, true); }

  /// B r: the result of the configured application on a zero initial guess.
  Vector apply_B(const Vector& r) const {
    Vector x = Vector::Zero(a_->rows());
    sweep(r, x);
    return x;
  }

  Vector apply_B_transposed(const Vector& r) const {
    Vector x = Vector::Zero(a_->rows());
    sweep_transposed(r, x);
    return x;
  }

  /// (I - T) e = e - B(A e): the smoother acting on the error equation.
  Vector error_apply(const Vector& e) const { return e - apply_B((*a_) * e); }

 private:
  void run(const Vector& b, Vector& x, bool transposed) const {
    for (int s = 0; s < cfg_.sweeps; ++s) {
      switch (cfg_.ordering) {
        case SweepOrdering::forward:
          pass(b, x, !transposed);
          break;
        case SweepOrdering::backward:
          pass(b, x, transposed);
          break;
        case SweepOrdering::symmetric:  // self-transposed
          pass(b, x, true);
          pass(b, x, false);
          break;
      }
    }
  }

  void pass(const Vector& b, Vector& x, bool forward) const {
    if (cfg_.kind == SmootherKind::point_gs) {
      detail::point_gs_pass(*a_, b, x, forward);
    } else if (forward) {
      for (int i = 0; i < blocks_->block_count(); ++i) blocks_->correct_block(*a_, i, b, x);
    } else {
      for (int i = blocks_->block_count() - 1; i >= 0; --i) blocks_->correct_block(*a_, i, b, x);
    }
  }

  const SparseMatrix* a_;
  SmootherConfig cfg_;
  std::shared_ptr<const BlockSolvers> blocks_;
};

/// Error propagation of one smoother application: e' = e - B(A e).
inline Vector error_operator_apply(const Smoother& smoother, const Vector& e) {
  return smoother.error_apply(e);
}

}  // namespace aniso
