#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aniso/assembly.hpp"
#include "aniso/hierarchy.hpp"
#include "aniso/mesh.hpp"
#include "support/oracles.hpp"

using namespace aniso;

namespace {

// Independent element-by-element dense assembly, written from the barycentric
// formulas directly; nothing shared with the library path except the mesh.
Matrix hand_assembled_stiffness(const Mesh& m, double eps, const DofMap& dofs) {
  Matrix a = Matrix::Zero(dofs.size(), dofs.size());
  for (const auto& tri : m.triangles) {
    const Vec2 p0 = m.vertices[tri[0]], p1 = m.vertices[tri[1]], p2 = m.vertices[tri[2]];
    const double two_area = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int gi = dofs.dof(tri[i]), gj = dofs.dof(tri[j]);
        if (gi < 0 || gj < 0) continue;
        a(gi, gj) += (b[i] * b[j] + eps * c[i] * c[j]) / (2.0 * two_area);
      }
    }
  }
  return a;
}

Mesh reference_triangle_mesh() {
  Mesh m;
  m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.triangles = {{0, 1, 2}};
  m.boundary = {1, 1, 1};
  m.h_char = std::sqrt(2.0);
  return m;
}

}  // namespace

TEST_CASE("five-point stencil at an interior node, epsilon = 1") {
  const Mesh m = build_rotated_uniform({4, 0.0});
  const DofMap dofs = DofMap::interior(m);
  const SparseMatrix a = assemble_stiffness(m, {1.0}, dofs);

  // centre vertex of the 5x5 grid
  const int centre = dofs.dof(2 * 5 + 2);
  REQUIRE(centre >= 0);
  const int east = dofs.dof(2 * 5 + 3), north = dofs.dof(3 * 5 + 2);
  const int ne = dofs.dof(3 * 5 + 3), nw = dofs.dof(3 * 5 + 1);
  CHECK(a.coeff(centre, centre) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(a.coeff(centre, east) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(a.coeff(centre, north) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(std::abs(a.coeff(centre, ne)) < 1e-13);   // no coupling along the split diagonal
  CHECK(std::abs(a.coeff(centre, nw)) < 1e-13);   // nw is not even a neighbour
}

TEST_CASE("general epsilon stencil and hand-assembly oracle") {
  const Mesh m = build_rotated_uniform({4, 0.0});
  const DofMap dofs = DofMap::interior(m);
  const double eps = 0.37;
  const SparseMatrix a = assemble_stiffness(m, {eps}, dofs);
  const int centre = dofs.dof(2 * 5 + 2);
  CHECK(a.coeff(centre, centre) == doctest::Approx(2.0 * (1.0 + eps)).epsilon(1e-13));

  const Matrix ref = hand_assembled_stiffness(m, eps, dofs);
  CHECK((oracle::dense(a) - ref).cwiseAbs().maxCoeff() < 1e-13);

  const Mesh rot = build_rotated_uniform({6, kPi / 3.0});
  const DofMap rdofs = DofMap::interior(rot);
  const SparseMatrix ra = assemble_stiffness(rot, {eps}, rdofs);
  const Matrix rref = hand_assembled_stiffness(rot, eps, rdofs);
  CHECK((oracle::dense(ra) - rref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("epsilon = 1 assembly is rotation invariant") {
  const DofMap dofs = DofMap::interior(build_rotated_uniform({4, 0.0}));
  const SparseMatrix a0 = assemble_stiffness(build_rotated_uniform({4, 0.0}), {1.0}, dofs);
  const SparseMatrix a1 = assemble_stiffness(build_rotated_uniform({4, kPi / 6.0}), {1.0}, dofs);
  CHECK((oracle::dense(a0) - oracle::dense(a1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stiffness is symmetric positive definite on interior dofs") {
  for (int n : {4, 8}) {
    for (double omega : {0.0, kPi / 4.0}) {
      const Mesh m = build_rotated_uniform({n, omega});
      const DofMap dofs = DofMap::interior(m);
      const SparseMatrix a = assemble_stiffness(m, {1e-4}, dofs);
      const Matrix d = oracle::dense(a);
      CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(oracle::smallest_eigenvalue(d) > 0.0);
    }
  }
}

TEST_CASE("invalid epsilon is rejected") {
  const Mesh m = build_rotated_uniform({2, 0.0});
  CHECK_THROWS_AS(assemble_stiffness(m, {0.0}, DofMap::interior(m)), std::invalid_argument);
  CHECK_THROWS_AS(assemble_stiffness(m, {-1.0}, DofMap::interior(m)), std::invalid_argument);
}

TEST_CASE("degenerate triangles are reported") {
  Mesh m = reference_triangle_mesh();
  m.vertices.push_back({1.0, 1e-18});
  m.triangles.push_back({1, 3, 2});
  m.boundary.push_back(1);
  CHECK_THROWS_WITH_AS(assemble_stiffness(m, {1.0}, DofMap::all(m)),
                       doctest::Contains("degenerate"), std::runtime_error);
}

TEST_CASE("element mass matrix on the reference triangle") {
  const Mesh m = reference_triangle_mesh();
  const SparseMatrix mm = assemble_mass(m, DofMap::all(m));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(mm.coeff(i, j) == doctest::Approx(i == j ? 1.0 / 12.0 : 1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("mass row sums equal the domain area") {
  for (double omega : {0.0, kPi / 6.0}) {
    const Mesh m = build_rotated_uniform({4, omega});
    const SparseMatrix mm = assemble_mass(m, DofMap::all(m));
    double total = 0.0;
    for (int i = 0; i < mm.rows(); ++i)
      for (SparseMatrix::InnerIterator it(mm, i); it; ++it) total += it.value();
    CHECK(total == doctest::Approx(4.0).epsilon(1e-13));
  }
}

TEST_CASE("mass matrix is positive definite") {
  const Mesh m = build_rotated_uniform({4, 0.0});
  const SparseMatrix mm = assemble_mass(m, DofMap::interior(m));
  CHECK(oracle::smallest_eigenvalue(oracle::dense(mm)) > 0.0);
}

TEST_CASE("delta_y values and telescoping") {
  Mesh m = reference_triangle_mesh();
  // edge from (1,0) to (0,1) runs from slot 1 to slot 2
  CHECK(delta_y(m, 0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(delta_y(m, 0, 1)) == doctest::Approx(1.0).epsilon(1e-14));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Mesh t;
    t.vertices = {{rng.symmetric(), rng.symmetric()},
                  {rng.symmetric(), rng.symmetric()},
                  {rng.symmetric(), rng.symmetric()}};
    if (signed_area(t.vertices[0], t.vertices[1], t.vertices[2]) < 1e-3) continue;
    t.triangles = {{0, 1, 2}};
    t.boundary = {0, 0, 0};
    t.h_char = 1.0;
    double sum = 0.0;
    for (int e = 0; e < 3; ++e) sum += delta_y(t, 0, e);
    CHECK(std::abs(sum) < 1e-12);

    // derivative identity against the barycentric gradient
    std::vector<double> nodal = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
    const GradientField g = piecewise_gradients(t, nodal);
    double ident = 0.0;
    for (int e = 0; e < 3; ++e) ident += delta_y(t, 0, e) * nodal[(e + 2) % 3];
    CHECK(ident == doctest::Approx(g.gx[0]).epsilon(1e-12));
  }
}

TEST_CASE("energy norm basics and dense oracle") {
  SparseMatrix eye(2, 2);
  eye.insert(0, 0) = 1.0;
  eye.insert(1, 1) = 1.0;
  eye.makeCompressed();
  Vector v(2);
  v << 3.0, 4.0;
  CHECK(energy_norm(eye, v) == doctest::Approx(5.0));
  CHECK(energy_norm(eye, Vector::Zero(2)) == 0.0);

  const Mesh m = build_rotated_uniform({4, kPi / 6.0});
  const DofMap dofs = DofMap::interior(m);
  const SparseMatrix a = assemble_stiffness(m, {1e-2}, dofs);
  const Matrix ad = oracle::dense(a);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_vector(rng, dofs.size());
    const double direct = x.dot(ad * x);
    CHECK(energy_norm(a, x) * energy_norm(a, x) == doctest::Approx(direct).epsilon(1e-12));
  }

  SparseMatrix indef(2, 2);
  indef.insert(0, 0) = -1.0;
  indef.insert(1, 1) = 1.0;
  indef.makeCompressed();
  Vector e0(2);
  e0 << 1.0, 0.0;
  CHECK_THROWS_AS(energy_norm(indef, e0), std::runtime_error);
}

TEST_CASE("directional seminorms agree with single-direction stiffness forms") {
  const Mesh m = build_rotated_uniform({6, kPi / 6.0});
  const DofMap dofs = DofMap::interior(m);
  const Matrix ax = hand_assembled_stiffness(m, 1e-12, dofs);  // x-part dominates
  Rng rng(8);
  const Vector v = random_vector(rng, dofs.size());
  const GradientField g = piecewise_gradients(m, nodal_values(m, dofs, v));
  // v' A_eps v = |dx v|^2 + eps |dy v|^2 for any eps
  const double eps = 0.123;
  const Matrix aeps = hand_assembled_stiffness(m, eps, dofs);
  CHECK(v.dot(aeps * v) ==
        doctest::Approx(g.norm_x_sq() + eps * g.norm_y_sq()).epsilon(1e-12));
  CHECK(v.dot(ax * v) == doctest::Approx(g.norm_x_sq()).epsilon(1e-6));
}

TEST_CASE("constant load vector integrates to the domain area") {
  const Mesh m = build_rotated_uniform({4, 0.0});
  const Vector b = assemble_load(m, DofMap::all(m), 2.5);
  CHECK(b.sum() == doctest::Approx(2.5 * 4.0).epsilon(1e-13));
}
