#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "aniso/assembly.hpp"
#include "aniso/hierarchy.hpp"
#include "aniso/strips.hpp"
#include "aniso/transfer.hpp"

namespace aniso {

/// Outcome of one numerical check: the worst constant observed over all
/// trials against the bound it must respect.
struct CheckReport {
  std::string id;
  std::string mesh;
  int trials = 0;
  double worst = 0.0;
  double bound = 0.0;
  double tol = 0.0;

  bool pass() const { return worst <= bound * (1.0 + tol); }
};

inline std::string mesh_label(const Mesh& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "nv=%d omega=%.6g", m.vertex_count(), m.omega);
  return buf;
}

/// Random fine function vanishing at the coarse vertices (so I_H w = 0):
/// coarse vertices share indices between the meshes, midpoints are appended.
inline Vector random_zero_at_coarse(const Hierarchy& h, Rng& rng) {
  Vector w = Vector::Zero(h.fine_dofs.size());
  for (int d = 0; d < h.fine_dofs.size(); ++d)
    if (h.fine_dofs.vertex(d) >= h.coarse.vertex_count()) w[d] = rng.symmetric();
  return w;
}

/// Per-element derivative identity dv/dx|_K = sum_E (delta_E y) v_E for random
/// nodal data, checked on every triangle.
inline CheckReport check_derivative_identity(const Mesh& mesh, int trials, std::uint64_t seed,
                                             double tolerance = 1e-12) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < std::max(1, trials); ++trial) {
    std::vector<double> nodal(mesh.vertex_count());
    for (auto& v : nodal) v = rng.symmetric();
    const GradientField g = piecewise_gradients(mesh, nodal);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      double sum = 0.0;
      for (int e = 0; e < 3; ++e) sum += delta_y(mesh, t, e) * nodal[mesh.triangles[t][(e + 2) % 3]];
      const double scale = std::max(1.0, std::abs(g.gx[t]));
      worst = std::max(worst, std::abs(sum - g.gx[t]) / scale);
    }
  }
  return {"derivative-identity", mesh_label(mesh), std::max(1, trials), worst, tolerance, 0.0};
}

/// d(I_H v)/dx|_K = (sum of the three corner-children x-derivatives minus the
/// central child's) / 2, per coarse triangle. Coarse functions pushed through
/// the prolongation must additionally reproduce their own coarse gradient,
/// which ties the check to the P actually in use.
inline CheckReport check_coarse_gradient_identity(const Hierarchy& h, const SparseMatrix& p,
                                                  int trials, std::uint64_t seed,
                                                  double tolerance = 1e-12) {
  Rng rng(seed);
  double worst = 0.0;
  const int eff_trials = std::max(1, trials);

  auto residual_for = [&](const Vector& v_fine, const std::vector<double>* coarse_nodal) {
    const std::vector<double> fine_nodal = nodal_values(h.fine, h.fine_dofs, v_fine);
    const GradientField gf = piecewise_gradients(h.fine, fine_nodal);
    const std::vector<double> ih_nodal =
        nodal_values(h.coarse, h.coarse_dofs, interp_IH(h, v_fine));
    const GradientField gc = piecewise_gradients(h.coarse, ih_nodal);
    for (int t = 0; t < h.coarse.triangle_count(); ++t) {
      const auto& kids = h.children[t];
      const double rhs =
          0.5 * (gf.gx[kids[0]] + gf.gx[kids[1]] + gf.gx[kids[2]] - gf.gx[kids[3]]);
      double scale = std::max(1.0, std::abs(gc.gx[t]));
      for (int l = 0; l < 4; ++l) scale = std::max(scale, std::abs(gf.gx[kids[l]]));
      worst = std::max(worst, std::abs(gc.gx[t] - rhs) / scale);
      if (coarse_nodal) {
        const GradientField gdirect = piecewise_gradients(h.coarse, *coarse_nodal);
        worst = std::max(worst, std::abs(gc.gx[t] - gdirect.gx[t]) / scale);
      }
    }
  };

  for (int trial = 0; trial < eff_trials; ++trial) {
    residual_for(random_vector(rng, h.fine_dofs.size()), nullptr);
    const Vector vh = random_vector(rng, h.coarse_dofs.size());
    const std::vector<double> coarse_nodal = nodal_values(h.coarse, h.coarse_dofs, vh);
    residual_for(p * vh, &coarse_nodal);
  }
  return {"coarse-gradient-identity", mesh_label(h.fine), eff_trials, worst, tolerance, 0.0};
}

/// Coarse-interpolant stability |d(I_H v)/dx|^2 <= 4 |dv/dx|^2 (same in y)
/// with the sharp constant, plus the approximation ratio |v - I_H v| / (h|v|_1).
inline std::vector<CheckReport> check_interpolant_stability(const Hierarchy& h, int trials,
                                                            std::uint64_t seed,
                                                            double approx_bound = 8.0) {
  Rng rng(seed);
  double worst_x = 0.0, worst_y = 0.0, worst_approx = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const Vector v = random_vector(rng, h.fine_dofs.size());
    const std::vector<double> fine_nodal = nodal_values(h.fine, h.fine_dofs, v);
    const GradientField gf = piecewise_gradients(h.fine, fine_nodal);
    const Vector vc = interp_IH(h, v);
    const std::vector<double> coarse_nodal = nodal_values(h.coarse, h.coarse_dofs, vc);
    const GradientField gc = piecewise_gradients(h.coarse, coarse_nodal);

    const double dx = gf.norm_x_sq(), dy = gf.norm_y_sq();
    if (dx >= 1e-14) worst_x = std::max(worst_x, gc.norm_x_sq() / dx);
    if (dy >= 1e-14) worst_y = std::max(worst_y, gc.norm_y_sq() / dy);

    const double h1 = gf.h1_sq();
    if (h1 >= 1e-14) {
      // Nodal values of I_H v on the fine mesh: coarse value at coarse
      // vertices, edge-midpoint average at midpoints.
      std::vector<double> diff = fine_nodal;
      for (int vc = 0; vc < h.coarse.vertex_count(); ++vc) diff[vc] -= coarse_nodal[vc];
      for (const auto& em : h.midpoints)
        diff[em.midpoint] -= 0.5 * (coarse_nodal[em.a] + coarse_nodal[em.b]);
      const double err = std::sqrt(l2_norm_sq(h.fine, diff));
      worst_approx = std::max(worst_approx, err / (h.fine.h_char * std::sqrt(h1)));
    }
  }
  const std::string label = mesh_label(h.fine);
  return {
      {"interpolant-stability-dx", label, trials, worst_x, 4.0, 1e-10},
      {"interpolant-stability-dy", label, trials, worst_y, 4.0, 1e-10},
      {"interpolant-approximation", label, trials, worst_approx, approx_bound, 0.0},
  };
}

namespace detail {

using Poly = std::vector<Vec2>;

/// Sutherland-Hodgman clip against the halfplane y <= cut (keep_below) or
/// y >= cut.
inline Poly clip_horizontal(const Poly& poly, double cut, bool keep_below) {
  Poly out;
  const int n = static_cast<int>(poly.size());
  auto inside = [&](const Vec2& p) { return keep_below ? p.y <= cut : p.y >= cut; };
  for (int i = 0; i < n; ++i) {
    const Vec2& cur = poly[i];
    const Vec2& nxt = poly[(i + 1) % n];
    const bool ci = inside(cur), ni = inside(nxt);
    if (ci) out.push_back(cur);
    if (ci != ni) {
      const double t = (cut - cur.y) / (nxt.y - cur.y);
      out.push_back({cur.x + t * (nxt.x - cur.x), cut});
    }
  }
  return out;
}

/// Integral of ((y - a) / w)^2 over a convex polygon, exact for the quadratic
/// integrand (edge-midpoint rule on a fan triangulation).
inline double integrate_ramp_sq(const Poly& poly, double a, double w) {
  if (poly.size() < 3) return 0.0;
  double total = 0.0;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const Vec2& p0 = poly[0];
    const Vec2& p1 = poly[k];
    const Vec2& p2 = poly[k + 1];
    const double area = signed_area(p0, p1, p2);
    const double m01 = 0.5 * (p0.y + p1.y), m12 = 0.5 * (p1.y + p2.y), m20 = 0.5 * (p2.y + p0.y);
    auto f = [&](double y) {
      const double r = (y - a) / w;
      return r * r;
    };
    total += area / 3.0 * (f(m01) + f(m12) + f(m20));
  }
  return total;
}

}  // namespace detail

/// Exact integral of theta_i(y)^2 over triangle t; the triangle is split at
/// the theta breaklines first (theta is only piecewise linear in y).
inline double integrate_theta_sq(const StripDecomposition& sd, int i, const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  detail::Poly poly = {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
  const double lo = sd.y_min + (i - 1) * sd.width;
  const double mid = sd.y_min + i * sd.width;
  const double hi = sd.y_min + (i + 1) * sd.width;

  const detail::Poly up =
      detail::clip_horizontal(detail::clip_horizontal(poly, lo, false), mid, true);
  const detail::Poly down =
      detail::clip_horizontal(detail::clip_horizontal(poly, mid, false), hi, true);
  return detail::integrate_ramp_sq(up, lo, sd.width) +
         detail::integrate_ramp_sq(down, hi, -sd.width);
}

/// theta^2 element integrals per strip, restricted to triangles that meet the
/// strip support.
inline std::vector<std::vector<std::pair<int, double>>> theta_sq_tables(
    const Mesh& mesh, const StripDecomposition& sd) {
  std::vector<std::vector<std::pair<int, double>>> tables(sd.index_count());
  for (int i = 0; i < sd.index_count(); ++i) {
    const double lo = sd.y_min + (i - 1) * sd.width;
    const double hi = sd.y_min + (i + 1) * sd.width;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles[t];
      double ymin_t = mesh.vertices[tri[0]].y, ymax_t = ymin_t;
      for (int k = 1; k < 3; ++k) {
        ymin_t = std::min(ymin_t, mesh.vertices[tri[k]].y);
        ymax_t = std::max(ymax_t, mesh.vertices[tri[k]].y);
      }
      if (ymax_t <= lo || ymin_t >= hi) continue;
      const double q = integrate_theta_sq(sd, i, mesh, t);
      if (q > 0.0) tables[i].push_back({t, q});
    }
  }
  return tables;
}

/// Worst ratio |d(I_h(theta_i w))/dx|^2 / |d(theta_i w)/dx|^2 over the strips
/// for one w; a vanishing denominator counts as ratio 0 (the 0/0 convention).
inline double strip_stability_worst_ratio(const Hierarchy& h, const StripDecomposition& sd,
                                  const std::vector<std::vector<std::pair<int, double>>>& tables,
                                  const Vector& w) {
  const Mesh& mesh = h.fine;
  const std::vector<double> wn = nodal_values(mesh, h.fine_dofs, w);
  const GradientField gw = piecewise_gradients(mesh, wn);
  const double wscale = std::max(1.0, w.size() > 0 ? w.cwiseAbs().maxCoeff() : 0.0);

  double worst = 0.0;
  for (int i = 0; i < sd.index_count(); ++i) {
    double den = 0.0;
    for (const auto& [t, q] : tables[i]) den += gw.gx[t] * gw.gx[t] * q;

    std::vector<double> un(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v)
      un[v] = sd.theta(i, mesh.vertices[v].y) * wn[v];
    const double num = piecewise_gradients(mesh, un).norm_x_sq();

    if (den > 1e-24 * wscale * wscale) worst = std::max(worst, num / den);
  }
  return worst;
}

/// Fine-interpolant stability (theta against a function vanishing at coarse
/// vertices): worst ratio over random trials.
inline CheckReport check_strip_interpolant_stability(const Hierarchy& h,
                                                     const StripDecomposition& sd, int trials,
                                                     std::uint64_t seed, double bound = 32.0) {
  Rng rng(seed);
  const auto tables = theta_sq_tables(h.fine, sd);
  double worst = 0.0;
  for (int trial = 0; trial < std::max(1, trials); ++trial) {
    const Vector w = random_zero_at_coarse(h, rng);
    worst = std::max(worst, strip_stability_worst_ratio(h, sd, tables, w));
  }
  return {"strip-interpolant-stability", mesh_label(h.fine), std::max(1, trials), worst, bound,
          0.0};
}

/// Stability of the strip decomposition of w = v - I_H v: the L2 mass is
/// preserved within a band both ways and the x-derivative energy is bounded,
/// plus the exact nodal identity sum_i I_h(theta_i w) = w.
inline std::vector<CheckReport> check_decomposition_stability(
    const Hierarchy& h, const SparseMatrix& p, const StripDecomposition& sd, int trials,
    std::uint64_t seed, double l2_band = 8.0, double dx_bound = 64.0) {
  Rng rng(seed);
  const Mesh& mesh = h.fine;
  double worst_upper = 0.0, worst_lower = 0.0, worst_dx = 0.0, worst_sum = 0.0;

  for (int trial = 0; trial < std::max(1, trials); ++trial) {
    const Vector v = random_vector(rng, h.fine_dofs.size());
    const Vector w = v - p * interp_IH(h, v);
    const std::vector<double> wn = nodal_values(mesh, h.fine_dofs, w);
    const double wscale = std::max(1.0, w.cwiseAbs().maxCoeff());

    const double w_l2 = l2_norm_sq(mesh, wn);
    const double w_dx = piecewise_gradients(mesh, wn).norm_x_sq();

    double sum_l2 = 0.0, sum_dx = 0.0;
    std::vector<double> accum(mesh.vertex_count(), 0.0);
    std::vector<double> un(mesh.vertex_count());
    for (int i = 0; i < sd.index_count(); ++i) {
      for (int vi = 0; vi < mesh.vertex_count(); ++vi) {
        un[vi] = sd.theta(i, mesh.vertices[vi].y) * wn[vi];
        accum[vi] += un[vi];
      }
      sum_l2 += l2_norm_sq(mesh, un);
      sum_dx += piecewise_gradients(mesh, un).norm_x_sq();
    }
    for (int vi = 0; vi < mesh.vertex_count(); ++vi)
      worst_sum = std::max(worst_sum, std::abs(accum[vi] - wn[vi]) / wscale);

    if (w_l2 > 1e-24) {
      const double r = sum_l2 / w_l2;
      worst_upper = std::max(worst_upper, r);
      worst_lower = std::max(worst_lower, 1.0 / r);
    }
    if (w_dx > 1e-24) worst_dx = std::max(worst_dx, sum_dx / w_dx);
  }

  const std::string label = mesh_label(mesh);
  const int n = std::max(1, trials);
  return {
      {"decomp-sum-identity", label, n, worst_sum, 1e-13, 0.0},
      {"decomp-l2-upper", label, n, worst_upper, l2_band, 0.0},
      {"decomp-l2-lower", label, n, worst_lower, l2_band, 0.0},
      {"decomp-dx", label, n, worst_dx, dx_bound, 0.0},
  };
}

/// The lower-bound witness of the aligned case: 1 - |x| on the first full
/// fine-vertex row above y = 0 (a row with no coarse vertices), zero
/// elsewhere. Requires an axis-aligned generated mesh.
inline Vector build_lower_bound_witness(const Mesh& fine, const DofMap& dofs) {
  if (std::abs(fine.omega) > 1e-12)
    throw std::invalid_argument("build_lower_bound_witness: mesh must be axis-aligned (omega = 0)");
  const int n =
      static_cast<int>(std::lround(std::sqrt(static_cast<double>(fine.vertex_count())))) - 1;
  if ((n + 1) * (n + 1) != fine.vertex_count() || n % 2 != 0)
    throw std::invalid_argument(
        "build_lower_bound_witness: expected a generated uniform mesh with even N");
  const double s = 2.0 / n;

  Vector witness = Vector::Zero(dofs.size());
  int found = 0;
  for (int v = 0; v < fine.vertex_count(); ++v) {
    if (std::abs(fine.vertices[v].y - s) > 1e-9 * s) continue;
    ++found;
    const int d = dofs.dof(v);
    if (d >= 0) witness[d] = 1.0 - std::abs(fine.vertices[v].x);
  }
  if (found != n + 1)
    throw std::runtime_error("build_lower_bound_witness: fine-vertex row at y = h not found");
  return witness;
}

struct LowerBoundRow {
  double epsilon = 0.0;
  int level = 0;
  double h = 0.0;      // fine grid spacing
  double r_value = 0.0;
  double r_scaled = 0.0;  // R * (epsilon + h^2), bounded below by the theorem
};

/// R = h^-2 |(I - Q_H) w|^2 / |w|_a^2 for the witness w, Q_H the L2 projection onto the
/// coarse space, tabulated over epsilons and levels (omega = 0).
inline std::vector<LowerBoundRow> check_lower_bound(int n0, const std::vector<double>& epsilons,
                                                    int level_min, int level_max) {
  std::vector<LowerBoundRow> rows;
  for (int level = level_min; level <= level_max; ++level) {
    const Hierarchy h = hierarchy_at_level(n0, 0.0, level);
    const SparseMatrix p = prolongation(h);
    const SparseMatrix m_fine = assemble_mass(h.fine, h.fine_dofs);
    const SparseMatrix m_coarse = galerkin_coarse(m_fine, p);
    const CholeskyFactor mass_chol(m_coarse);

    const Vector witness = build_lower_bound_witness(h.fine, h.fine_dofs);
    const Vector q = witness - p * mass_chol.solve(p.transpose() * (m_fine * witness));
    const double q_l2 = q.dot(m_fine * q);

    const std::vector<double> nodal = nodal_values(h.fine, h.fine_dofs, witness);
    const GradientField g = piecewise_gradients(h.fine, nodal);
    const double sdx = g.norm_x_sq(), sdy = g.norm_y_sq();

    const int n_fine = n0 << level;
    const double s = 2.0 / n_fine;
    for (double eps : epsilons) {
      const double energy = sdx + eps * sdy;
      const double r = q_l2 / (s * s * energy);
      rows.push_back({eps, level, s, r, r * (eps + s * s)});
    }
  }
  return rows;
}

struct VerifyOptions {
  int trials = 100;
  std::uint64_t seed = 7;
  double strip_stability_bound = 32.0;
  double decomp_l2_band = 8.0;
  double decomp_dx_bound = 64.0;
  bool corrupt_prolongation = false;  // fault-injection hook used by tests
};

struct VerifySummary {
  std::vector<CheckReport> reports;
  bool hard_fail = false;      // an exact identity or the sharp stability bound failed
  bool inequalities_run = true;
};

/// Runs the full check suite on one hierarchy. Exact identities always run
/// (at least one instance each); the randomized inequality checks require
/// trials > 0.
inline VerifySummary run_verify_suite(const Hierarchy& h, const StripDecomposition& strips,
                                      const VerifyOptions& opt) {
  VerifySummary out;
  if (h.coarse_dofs.size() < 1)
    throw std::invalid_argument("run_verify_suite: coarse mesh has no interior dofs");
  SparseMatrix p = prolongation(h);
  if (opt.corrupt_prolongation) {
    // scale the first identity entry (a coarse-vertex row), which breaks the
    // nestedness the coarse-gradient and reproduction identities rely on
    for (int r = 0; r < p.outerSize(); ++r) {
      SparseMatrix::InnerIterator it(p, r);
      if (it) {
        it.valueRef() *= 1.2;
        break;
      }
    }
  }

  Rng seeds(opt.seed);
  out.reports.push_back(check_derivative_identity(h.fine, opt.trials, seeds.next()));
  out.reports.push_back(check_coarse_gradient_identity(h, p, opt.trials, seeds.next()));

  {  // I_H(P v_H) = v_H
    Rng rng(seeds.next());
    double worst = 0.0;
    const int eff = std::max(1, opt.trials);
    for (int trial = 0; trial < eff; ++trial) {
      const Vector vh = random_vector(rng, h.coarse_dofs.size());
      const Vector back = interp_IH(h, p * vh);
      worst = std::max(worst, (back - vh).cwiseAbs().maxCoeff() /
                                  std::max(1.0, vh.cwiseAbs().maxCoeff()));
    }
    out.reports.push_back({"interp-reproduce", mesh_label(h.fine), eff, worst, 1e-13, 0.0});
  }

  const bool v0_possible = std::abs(h.fine.omega) <= 1e-12;
  if (v0_possible) {
    const Vector witness = build_lower_bound_witness(h.fine, h.fine_dofs);
    const double worst = interp_IH(h, witness).cwiseAbs().maxCoeff();
    out.reports.push_back({"witness-interp-zero", mesh_label(h.fine), 1, worst, 1e-14, 0.0});
  }

  const auto decomp = check_decomposition_stability(h, p, strips, opt.trials, seeds.next(),
                                                    opt.decomp_l2_band, opt.decomp_dx_bound);
  out.reports.push_back(decomp[0]);  // the exact nodal sum identity

  out.inequalities_run = opt.trials > 0;
  if (out.inequalities_run) {
    for (const auto& r : check_interpolant_stability(h, opt.trials, seeds.next()))
      out.reports.push_back(r);
    out.reports.push_back(check_strip_interpolant_stability(h, strips, opt.trials, seeds.next(),
                                                            opt.strip_stability_bound));
    for (std::size_t i = 1; i < decomp.size(); ++i) out.reports.push_back(decomp[i]);
  }

  for (const auto& r : out.reports) {
    const bool hard = r.id == "derivative-identity" || r.id == "coarse-gradient-identity" ||
                      r.id == "interp-reproduce" || r.id == "witness-interp-zero" ||
                      r.id == "decomp-sum-identity" || r.id == "interpolant-stability-dx" ||
                      r.id == "interpolant-stability-dy";
    if (hard && !r.pass()) out.hard_fail = true;
  }
  return out;
}

}  // namespace aniso
