#pragma once

#include <Eigen/SparseCholesky>

#include <stdexcept>

#include "aniso/core.hpp"

namespace aniso {

/// Sparse SPD direct factorization (simplicial Cholesky with AMD ordering).
/// Immutable after construction; solves are const and thread-safe.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SparseMatrix& a) {
    Eigen::SparseMatrix<double> ac = a;  // solver wants column-major
    llt_.compute(ac);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("sparse Cholesky factorization failed (matrix not SPD?)");
    rows_ = a.rows();
  }

  Vector solve(const Vector& b) const { return llt_.solve(b); }
  Eigen::Index rows() const { return rows_; }

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  Eigen::Index rows_ = 0;
};

}  // namespace aniso
