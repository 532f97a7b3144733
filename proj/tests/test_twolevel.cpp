#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>

#include "aniso/assembly.hpp"
#include "aniso/hierarchy.hpp"
#include "aniso/transfer.hpp"
#include "aniso/twolevel.hpp"
#include "support/oracles.hpp"

using namespace aniso;

namespace {
struct Setup {
  Hierarchy h;
  SparseMatrix a;
  SparseMatrix p;
  StripDecomposition strips;
};

Setup make(int n0, double omega, double eps, int level = 1) {
  Setup s;
  s.h = hierarchy_at_level(n0, omega, level);
  s.a = assemble_stiffness(s.h.fine, {eps}, s.h.fine_dofs);
  s.p = prolongation(s.h);
  s.strips = build_strips(s.h.fine, s.h.fine_dofs, s.h.fine.h_char);
  return s;
}

StripDecomposition one_block(int n) {
  StripDecomposition sd;
  sd.y_min = 0.0;
  sd.y_max = 1.0;
  sd.width = 1.0;
  sd.strip_count = -1;
  sd.blocks.resize(1);
  for (int d = 0; d < n; ++d) sd.blocks[0].push_back(d);
  return sd;
}
}  // namespace

TEST_CASE("coarse functions are annihilated and the exact smoother kills everything") {
  const Setup s = make(4, kPi / 6.0, 1e-3);
  Rng rng(2);

  const TwoLevelOperator op(s.a, s.p, SmootherConfig{});
  const Vector coarse_vec = s.p * random_vector(rng, s.h.coarse_dofs.size());
  CHECK(op.apply_E(coarse_vec).cwiseAbs().maxCoeff() < 1e-10);

  const StripDecomposition all = one_block(s.h.fine_dofs.size());
  SmootherConfig exact{SmootherKind::line_gs, 1, SweepOrdering::forward, &all};
  const TwoLevelOperator op_exact(s.a, s.p, exact);
  CHECK(op_exact.apply_E(random_vector(rng, s.h.fine_dofs.size())).cwiseAbs().maxCoeff() < 1e-10);
  const PowerResult r = op_exact.estimate_rate(1e-10, 200, 42);
  CHECK(r.converged);
  CHECK(r.value < 1e-12);
}

TEST_CASE("dense assembly of E matches the operator product formula") {
  const Setup s = make(4, 0.0, 1e-2);
  const TwoLevelOperator op(s.a, s.p, SmootherConfig{});
  const int n = s.h.fine_dofs.size();

  const Matrix e_cols = oracle::materialize(n, [&](const Vector& v) { return op.apply_E(v); });

  const Matrix ad = oracle::dense(s.a);
  const Matrix pd = oracle::dense(s.p);
  const Matrix ahd = pd.transpose() * ad * pd;
  const Matrix ph = pd * ahd.llt().solve(pd.transpose() * ad);
  const Matrix t = oracle::point_gs_error_operator(ad);  // I - (D+L)^{-1} A
  const Matrix ref = t * (Matrix::Identity(n, n) - ph);
  CHECK((e_cols - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("energy adjoint satisfies the defining identity") {
  for (SmootherKind kind : {SmootherKind::point_gs, SmootherKind::line_gs}) {
    const Setup s = make(4, kPi / 4.0, 1e-4);
    SmootherConfig cfg{kind, 1, SweepOrdering::forward,
                       kind == SmootherKind::line_gs ? &s.strips : nullptr};
    const TwoLevelOperator op(s.a, s.p, cfg);
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector e1 = random_vector(rng, s.h.fine_dofs.size());
      const Vector e2 = random_vector(rng, s.h.fine_dofs.size());
      const double lhs = op.energy_product(op.apply_E(e1), e2);
      const double rhs = op.energy_product(e1, op.apply_E_adjoint(e2));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("dense adjoint equals A^{-1} E' A and kills the a-complement of range(E)") {
  const Setup s = make(4, 0.0, 1e-2);
  const TwoLevelOperator op(s.a, s.p, SmootherConfig{});
  const int n = s.h.fine_dofs.size();
  const Matrix ad = oracle::dense(s.a);
  const Matrix e = oracle::materialize(n, [&](const Vector& v) { return op.apply_E(v); });
  const Matrix eadj =
      oracle::materialize(n, [&](const Vector& v) { return op.apply_E_adjoint(v); });
  const Matrix ref = ad.llt().solve(e.transpose() * ad);
  CHECK((eadj - ref).cwiseAbs().maxCoeff() < 1e-10);

  // v with E^t A v = 0 lies in the a-orthogonal complement of range(E)
  Eigen::JacobiSVD<Matrix> svd(e.transpose() * ad, Eigen::ComputeFullV);
  const Vector v = svd.matrixV().col(n - 1);
  REQUIRE(svd.singularValues()(n - 1) < 1e-10 * svd.singularValues()(0));
  CHECK(op.apply_E_adjoint(v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("estimated rate matches the dense energy-norm oracle") {
  for (double omega : {0.0, kPi / 4.0}) {
    for (double eps : {1.0, 1e-4}) {
      for (SmootherKind kind : {SmootherKind::point_gs, SmootherKind::line_gs}) {
        const Setup s = make(4, omega, eps);
        SmootherConfig cfg{kind, 1, SweepOrdering::forward,
                           kind == SmootherKind::line_gs ? &s.strips : nullptr};
        const TwoLevelOperator op(s.a, s.p, cfg);
        const Matrix e = oracle::materialize(s.h.fine_dofs.size(),
                                             [&](const Vector& v) { return op.apply_E(v); });
        const double exact = oracle::energy_norm_sq(oracle::dense(s.a), e);
        const PowerResult r = op.estimate_rate(1e-12, 100000, 42);
        CHECK(std::abs(r.value - exact) < 1e-8);
      }
    }
  }
}

TEST_CASE("rate estimates are reproducible across seeds") {
  const Setup s = make(4, kPi / 6.0, 1e-4);
  const TwoLevelOperator op(s.a, s.p, SmootherConfig{});
  const double r1 = op.estimate_rate(1e-10, 20000, 42).value;
  const double r2 = op.estimate_rate(1e-10, 20000, 1234).value;
  CHECK(std::abs(r1 - r2) < 1e-6);
}

TEST_CASE("aligned point GS deteriorates at small epsilon") {
  // fine grid spacing 1/16 -> coarse n0 = 16, one refinement; the rate must
  // sit inside the theorem band [1 - 10(eps + h^2), 1)
  const Setup s = make(16, 0.0, 1e-8);
  const TwoLevelOperator op(s.a, s.p, SmootherConfig{});
  const PowerResult r = op.estimate_rate(1e-8, 2000, 42);
  const double spacing = 1.0 / 16.0;
  CHECK(r.value >= 1.0 - 10.0 * (1e-8 + spacing * spacing));
  CHECK(r.value < 1.0);
  CHECK(r.value >= 0.97);
}

TEST_CASE("rate grows monotonically as epsilon shrinks (aligned point GS)") {
  const Hierarchy h = hierarchy_at_level(4, 0.0, 2);
  const SparseMatrix p = prolongation(h);
  double prev = -1.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const SparseMatrix a = assemble_stiffness(h.fine, {eps}, h.fine_dofs);
    const TwoLevelOperator op(a, p, SmootherConfig{});
    const double rate = op.estimate_rate(1e-10, 20000, 42).value;
    CHECK(rate >= prev - 1e-6);
    prev = rate;
  }
}

TEST_CASE("line GS contracts strongly in the anisotropic aligned case") {
  const Setup s = make(4, 0.0, 1e-6);
  SmootherConfig cfg{SmootherKind::line_gs, 1, SweepOrdering::forward, &s.strips};
  const TwoLevelOperator op(s.a, s.p, cfg);
  Rng rng(3);
  const Vector e = random_vector(rng, s.h.fine_dofs.size());
  const Vector e2 = op.apply_E(e);
  CHECK(energy_norm(s.a, e2) <= 0.9 * energy_norm(s.a, e));
}

TEST_CASE("solver recovers manufactured solutions and reports residual history") {
  const Setup s = make(8, kPi / 6.0, 1e-4);
  SmootherConfig cfg{SmootherKind::line_gs, 1, SweepOrdering::forward, &s.strips};
  const TwoLevelOperator op(s.a, s.p, cfg);

  Rng rng(7);
  const Vector x_star = random_vector(rng, s.h.fine_dofs.size());
  const Vector b = s.a * x_star;
  const auto result = op.solve(b, 1e-12, 200);
  CHECK(result.converged);
  CHECK((result.x - x_star).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(result.residual_history.size() == static_cast<std::size_t>(result.iterations) + 1);

  const auto zero = op.solve(Vector::Zero(s.h.fine_dofs.size()), 1e-12, 200);
  CHECK(zero.iterations == 0);
  CHECK(zero.converged);
  CHECK(zero.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("per-step energy contraction respects the estimated rate") {
  const Setup s = make(8, 0.0, 1e-2);
  const TwoLevelOperator op(s.a, s.p, SmootherConfig{});
  const double rate = op.estimate_rate(1e-10, 20000, 42).value;

  Rng rng(9);
  const Vector x_star = random_vector(rng, s.h.fine_dofs.size());
  const Vector b = s.a * x_star;
  Vector x = Vector::Zero(s.h.fine_dofs.size());
  double prev_sq = energy_norm(s.a, x - x_star);
  prev_sq *= prev_sq;
  for (int it = 0; it < 8; ++it) {
    x += op.context().coarse().correct(b - s.a * x);
    op.smoother().sweep(b, x);
    double e_sq = energy_norm(s.a, x - x_star);
    e_sq *= e_sq;
    if (prev_sq < 1e-24) break;
    CHECK(e_sq / prev_sq <= rate + 0.05);
    prev_sq = e_sq;
  }
}

TEST_CASE("line GS iteration counts are epsilon independent") {
  // fine mesh n = 32 at omega = pi/6
  const Hierarchy h = hierarchy_at_level(16, kPi / 6.0, 1);
  const SparseMatrix p = prolongation(h);
  const StripDecomposition sd = build_strips(h.fine, h.fine_dofs, h.fine.h_char);
  Rng rng(11);
  const Vector x_star = random_vector(rng, h.fine_dofs.size());
  int iters[2] = {0, 0};
  int k = 0;
  for (double eps : {1e-2, 1e-6}) {
    const SparseMatrix a = assemble_stiffness(h.fine, {eps}, h.fine_dofs);
    SmootherConfig cfg{SmootherKind::line_gs, 1, SweepOrdering::forward, &sd};
    const TwoLevelOperator op(a, p, cfg);
    iters[k++] = op.solve(a * x_star, 1e-8, 200).iterations;
  }
  CHECK(std::abs(iters[0] - iters[1]) <= 2);
}
