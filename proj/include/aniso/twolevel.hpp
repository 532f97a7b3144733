#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aniso/core.hpp"
#include "aniso/linsolve.hpp"
#include "aniso/smoothers.hpp"
#include "aniso/transfer.hpp"

namespace aniso {

struct PowerResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration for the top eigenvalue of a self-adjoint positive
/// semidefinite operator G in the given inner product. Stops when successive
/// Rayleigh quotients differ by less than tol relatively; near a cluster the
/// reported value is the max of the last 10 quotients.
inline PowerResult power_iteration(Vector z, const std::function<Vector(const Vector&)>& g,
                                   const std::function<double(const Vector&, const Vector&)>& inner,
                                   double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("power_iteration: tol must be > 0");
  PowerResult out;
  double nz = std::sqrt(std::max(0.0, inner(z, z)));
  if (nz == 0.0) return out;
  z /= nz;

  std::deque<double> ring;
  double prev = -1.0;
  for (int k = 1; k <= max_iter; ++k) {
    const Vector w = g(z);
    const double rho = inner(w, z);
    out.iterations = k;
    ring.push_back(rho);
    if (ring.size() > 10) ring.pop_front();
    if (rho <= 1e-14) {  // numerically zero operator; relative change is noise
      out.value = std::max(rho, 0.0);
      out.converged = true;
      return out;
    }
    if (k > 1 && std::abs(rho - prev) <= tol * rho) {
      out.value = *std::max_element(ring.begin(), ring.end());
      out.converged = true;
      return out;
    }
    prev = rho;
    const double nw = std::sqrt(std::max(0.0, inner(w, w)));
    if (nw <= 1e-300) {
      out.value = rho;
      out.converged = true;
      return out;
    }
    z = w / nw;
  }
  out.value = *std::max_element(ring.begin(), ring.end());
  out.converged = false;
  return out;
}

/// Everything shared between smoother configurations for one (mesh, epsilon):
/// fine matrix, prolongation with the coarse factorization, and the fine
/// factorization used by the energy adjoint.
class TwoLevelContext {
 public:
  TwoLevelContext(SparseMatrix a, SparseMatrix p)
      : a_(std::move(a)), coarse_(a_, std::move(p)), fine_chol_(a_) {}

  const SparseMatrix& matrix() const { return a_; }
  const CoarseCorrection& coarse() const { return coarse_; }
  const CholeskyFactor& fine_factor() const { return fine_chol_; }

 private:
  SparseMatrix a_;
  CoarseCorrection coarse_;
  CholeskyFactor fine_chol_;
};

struct RateReport {
  double omega = 0.0;
  int level = 0;
  double h = 0.0;
  double epsilon = 1.0;
  SmootherKind smoother = SmootherKind::point_gs;
  double rate = 0.0;  // estimate of |E_TL|_a^2
  int iterations = 0;
  bool converged = false;

  /// K from |E_TL|_a^2 = 1 - 1/K; meaningful only while rate < 1.
  double k_est() const { return rate < 1.0 ? 1.0 / (1.0 - rate) : std::nan(""); }
};

/// E_TL = (I - T)(I - P_H): coarse correction followed by one smoother
/// error-reduction application, with the energy adjoint E' = A^{-1} E^t A.
class TwoLevelOperator {
 public:
  TwoLevelOperator(std::shared_ptr<const TwoLevelContext> ctx, const SmootherConfig& cfg)
      : ctx_(std::move(ctx)), smoother_(ctx_->matrix(), cfg) {}

  TwoLevelOperator(SparseMatrix a, SparseMatrix p, const SmootherConfig& cfg)
      : TwoLevelOperator(std::make_shared<TwoLevelContext>(std::move(a), std::move(p)), cfg) {}

  Eigen::Index dim() const { return ctx_->matrix().rows(); }
  const TwoLevelContext& context() const { return *ctx_; }
  const Smoother& smoother() const { return smoother_; }

  Vector apply_E(const Vector& e) const {
    const Vector c = e - ctx_->coarse().project(ctx_->matrix(), e);
    return smoother_.error_apply(c);
  }

  Vector apply_E_adjoint(const Vector& v) const {
    const SparseMatrix& a = ctx_->matrix();
    const Vector u = a * v;
    Vector w = u - a * smoother_.apply_B_transposed(u);
    w -= a * ctx_->coarse().correct(w);
    return ctx_->fine_factor().solve(w);
  }

  double energy_product(const Vector& u, const Vector& v) const {
    return u.dot(ctx_->matrix() * v);
  }

  /// |E_TL|_a^2 via power iteration on E'E in the A-inner product, from a
  /// seeded random start.
  PowerResult estimate_rate(double tol = 1e-8, int max_iter = 2000,
                            std::uint64_t seed = 42) const {
    Rng rng(seed);
    const Vector z0 = random_vector(rng, dim());
    auto g = [this](const Vector& x) { return apply_E_adjoint(apply_E(x)); };
    auto inner = [this](const Vector& u, const Vector& v) { return energy_product(u, v); };
    return power_iteration(z0, g, inner, tol, max_iter);
  }

  struct SolveResult {
    Vector x;
    int iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
  };

  /// Runs the two-level iteration as a solver: coarse correction, then one
  /// smoother application, until the relative residual drops below tol.
  SolveResult solve(const Vector& b, double tol = 1e-10, int max_iter = 200) const {
    const SparseMatrix& a = ctx_->matrix();
    SolveResult out;
    out.x = Vector::Zero(dim());
    const double nb = b.norm();
    out.residual_history.push_back(nb);
    if (nb == 0.0) {
      out.converged = true;
      return out;
    }
    double prev = nb;
    int growth = 0;
    for (int it = 1; it <= max_iter; ++it) {
      Vector r = b - a * out.x;
      out.x += ctx_->coarse().correct(r);
      smoother_.sweep(b, out.x);
      const double nr = (b - a * out.x).norm();
      out.residual_history.push_back(nr);
      out.iterations = it;
      if (nr <= tol * nb) {
        out.converged = true;
        break;
      }
      growth = nr > prev ? growth + 1 : 0;
      if (growth >= 10)
        throw std::runtime_error("two-level solve diverged: residual grew 10 steps in a row");
      prev = nr;
    }
    return out;
  }

 private:
  std::shared_ptr<const TwoLevelContext> ctx_;
  Smoother smoother_;
};

}  // namespace aniso
