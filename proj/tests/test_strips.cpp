#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "aniso/hierarchy.hpp"
#include "aniso/strips.hpp"

using namespace aniso;

TEST_CASE("partition of unity hats: apex, endpoints, and the exact sum") {
  const Mesh m = build_rotated_uniform({8, kPi / 4.0});
  const StripDecomposition sd = build_strips(m, DofMap::interior(m), m.h_char);

  const int i = sd.strip_count / 2;
  CHECK(sd.theta(i, sd.y_min + i * sd.width) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sd.theta(i, sd.y_min + (i - 1) * sd.width) == 0.0);
  CHECK(sd.theta(i, sd.y_min + (i + 1) * sd.width) == 0.0);

  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const double y = sd.y_min + rng.unit() * (sd.y_max - sd.y_min);
    double sum = 0.0;
    for (int s = 0; s < sd.index_count(); ++s) {
      const double th = sd.theta(s, y);
      CHECK(th >= 0.0);
      CHECK(th <= 1.0);
      sum += th;
    }
    CHECK(std::abs(sum - 1.0) < 1e-14);
  }
}

TEST_CASE("strip count follows the floor formula") {
  const Mesh m = build_rotated_uniform({4, kPi / 4.0});
  const StripDecomposition sd = build_strips(m, DofMap::interior(m), m.h_char);
  auto [lo, hi] = y_extent(m);
  CHECK(sd.strip_count == static_cast<int>(std::floor((hi - lo) / m.h_char)));
  CHECK(sd.index_count() == sd.strip_count + 2);
}

TEST_CASE("blocks cover all interior dofs with small overlap") {
  for (double omega : {0.0, kPi / 6.0, kPi / 4.0}) {
    for (int n : {4, 8}) {
      const Hierarchy h = hierarchy_at_level(n, omega, 1);
      const DofMap& dofs = h.fine_dofs;
      const StripDecomposition sd = build_strips(h.fine, dofs, h.fine.h_char);

      std::vector<int> membership(dofs.size(), 0);
      for (const auto& blk : sd.blocks)
        for (int d : blk) ++membership[d];
      for (int d = 0; d < dofs.size(); ++d) {
        CHECK(membership[d] >= 1);
        CHECK(membership[d] <= 3);
      }

      // every dof of block i lies within two widths of the strip centre
      for (int i = 0; i < sd.index_count(); ++i) {
        for (int d : sd.blocks[i]) {
          const double t = h.fine.vertices[dofs.vertex(d)].y - sd.y_min;
          CHECK(t >= (i - 2) * sd.width - 1e-12);
          CHECK(t <= (i + 2) * sd.width + 1e-12);
        }
      }

      // triangles belong to at most 4 strip sets
      for (int t = 0; t < h.fine.triangle_count(); ++t) {
        int uses = 0;
        for (int i = 0; i < sd.index_count(); ++i) {
          bool in = false;
          for (int k = 0; k < 3; ++k) {
            const double ty = h.fine.vertices[h.fine.triangles[t][k]].y - sd.y_min;
            if (std::abs(ty - i * sd.width) <= sd.width) in = true;
          }
          uses += in;
        }
        CHECK(uses <= 4);
      }
    }
  }
}

TEST_CASE("axis-aligned strips group dofs into horizontal bands") {
  const Hierarchy h = hierarchy_at_level(4, 0.0, 1);
  const StripDecomposition sd = build_strips(h.fine, h.fine_dofs, h.fine.h_char);
  for (int i = 0; i < sd.index_count(); ++i) {
    std::set<long> rows;
    for (int d : sd.blocks[i]) {
      const double y = h.fine.vertices[h.fine_dofs.vertex(d)].y;
      rows.insert(std::lround((y + 1.0) / (2.0 / 8.0)));
    }
    CHECK(rows.size() <= 3);  // a band of at most three vertex rows per block
  }
}

TEST_CASE("decomposition identity: strip pieces sum back nodally") {
  const Hierarchy h = hierarchy_at_level(8, kPi / 6.0, 1);
  const StripDecomposition sd = build_strips(h.fine, h.fine_dofs, h.fine.h_char);
  Rng rng(23);
  const Vector w = random_vector(rng, h.fine_dofs.size());
  for (int d = 0; d < h.fine_dofs.size(); ++d) {
    const double y = h.fine.vertices[h.fine_dofs.vertex(d)].y;
    double sum = 0.0;
    for (int i = 0; i < sd.index_count(); ++i) sum += sd.theta(i, y) * w[d];
    CHECK(std::abs(sum - w[d]) < 1e-14 * std::max(1.0, std::abs(w[d])));
  }
}

TEST_CASE("degenerate inputs are rejected") {
  const Mesh m1 = build_rotated_uniform({1, 0.0});  // no interior vertices
  CHECK_THROWS_AS(build_strips(m1, DofMap::interior(m1), m1.h_char), std::runtime_error);
  const Mesh m = build_rotated_uniform({4, 0.0});
  CHECK_THROWS_AS(build_strips(m, DofMap::interior(m), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_strips(m, DofMap::interior(m), 1e-9), std::invalid_argument);
}
