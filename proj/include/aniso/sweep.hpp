#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "aniso/assembly.hpp"
#include "aniso/hierarchy.hpp"
#include "aniso/strips.hpp"
#include "aniso/svg.hpp"
#include "aniso/twolevel.hpp"
#include "aniso/verify.hpp"

namespace aniso {

struct SweepSpec {
  std::vector<double> omegas = {0.0, kPi / 6.0, kPi / 4.0};
  int level_min = 1;
  int level_max = 5;
  std::vector<double> epsilons = {1e0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  std::vector<SmootherKind> smoothers = {SmootherKind::point_gs, SmootherKind::line_gs};
  SweepOrdering ordering = SweepOrdering::forward;
  int n0 = 4;
  double strip_width = 0.0;  // 0: fine h_char
  std::uint64_t seed = 42;
  double tol = 1e-8;
  int max_iter = 2000;
};

struct SweepRow {
  RateReport report;
  bool failed = false;
  std::string error;
};

inline int env_thread_cap() {
  if (const char* env = std::getenv("ANISO_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs the whole (omega, level, epsilon, smoother) grid. Cases execute
/// concurrently grouped by (omega, level) so the mesh, prolongation, and
/// strips are built once per group; rows come back in spec order regardless
/// of scheduling.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 0) {
  if (spec.omegas.empty() || spec.epsilons.empty() || spec.smoothers.empty())
    throw std::invalid_argument("run_sweep: empty omega/epsilon/smoother list");
  if (spec.level_min < 1 || spec.level_max < spec.level_min)
    throw std::invalid_argument("run_sweep: bad level range");

  const int n_levels = spec.level_max - spec.level_min + 1;
  const int per_level = static_cast<int>(spec.epsilons.size() * spec.smoothers.size());
  const int n_groups = static_cast<int>(spec.omegas.size()) * n_levels;
  std::vector<SweepRow> rows(static_cast<std::size_t>(n_groups) * per_level);

  auto run_group = [&](int group) {
    const int oi = group / n_levels;
    const int li = group % n_levels;
    const double omega = spec.omegas[oi];
    const int level = spec.level_min + li;
    const int base = group * per_level;

    Hierarchy hier;
    SparseMatrix p;
    StripDecomposition strips;
    bool group_ok = true;
    std::string group_error;
    try {
      hier = hierarchy_at_level(spec.n0, omega, level);
      p = prolongation(hier);
      const double width = spec.strip_width > 0.0 ? spec.strip_width : hier.fine.h_char;
      strips = build_strips(hier.fine, hier.fine_dofs, width);
    } catch (const std::exception& e) {
      group_ok = false;
      group_error = e.what();
    }

    int idx = base;
    for (double eps : spec.epsilons) {
      std::shared_ptr<const TwoLevelContext> ctx;
      std::string eps_error;
      if (group_ok) {
        try {
          SparseMatrix a = assemble_stiffness(hier.fine, {eps}, hier.fine_dofs);
          ctx = std::make_shared<TwoLevelContext>(std::move(a), p);
        } catch (const std::exception& e) {
          eps_error = e.what();
        }
      }
      for (SmootherKind kind : spec.smoothers) {
        SweepRow& row = rows[idx++];
        row.report.omega = omega;
        row.report.level = level;
        row.report.epsilon = eps;
        row.report.smoother = kind;
        row.report.h = group_ok ? hier.fine.h_char : 0.0;
        if (!group_ok || !ctx) {
          row.failed = true;
          row.error = group_ok ? eps_error : group_error;
          row.report.rate = std::nan("");
          continue;
        }
        try {
          SmootherConfig cfg{kind, 1, spec.ordering,
                             kind == SmootherKind::line_gs ? &strips : nullptr};
          const TwoLevelOperator op(ctx, cfg);
          const PowerResult res = op.estimate_rate(spec.tol, spec.max_iter, spec.seed);
          row.report.rate = res.value;
          row.report.iterations = res.iterations;
          row.report.converged = res.converged;
        } catch (const std::exception& e) {
          row.failed = true;
          row.error = e.what();
          row.report.rate = std::nan("");
        }
      }
    }
  };

  int n_threads = threads > 0 ? threads : env_thread_cap();
  n_threads = std::min(n_threads, n_groups);
  if (n_threads <= 1) {
    for (int g = 0; g < n_groups; ++g) run_group(g);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        for (int g = next.fetch_add(1); g < n_groups; g = next.fetch_add(1)) run_group(g);
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

inline const char* smoother_name(SmootherKind k) {
  return k == SmootherKind::point_gs ? "point" : "line";
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "omega,level,h,epsilon,smoother,rate,K_est,iterations,converged\n";
  char buf[256];
  for (const auto& row : rows) {
    const RateReport& r = row.report;
    std::string k_est;
    if (!row.failed && r.rate < 1.0) {
      std::snprintf(buf, sizeof buf, "%.9g", r.k_est());
      k_est = buf;
    }
    std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g,%s,%.10g,%s,%d,%d\n", r.omega, r.level,
                  r.h, r.epsilon, smoother_name(r.smoother), r.rate, k_est.c_str(), r.iterations,
                  r.converged ? 1 : 0);
    out += buf;
  }
  return out;
}

/// One SVG per omega: rate against log10(epsilon), one polyline per level.
inline std::string sweep_svg(const std::vector<SweepRow>& rows, double omega,
                             SmootherKind smoother) {
  std::vector<PlotSeries> series;
  for (const auto& row : rows) {
    const RateReport& r = row.report;
    if (r.omega != omega || r.smoother != smoother || row.failed) continue;
    char label[32];
    std::snprintf(label, sizeof label, "level %d", r.level);
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const PlotSeries& s) { return s.label == label; });
    if (it == series.end()) {
      series.push_back({label, {}});
      it = series.end() - 1;
    }
    it->points.push_back({std::log10(r.epsilon), r.rate});
  }
  for (auto& s : series)
    std::sort(s.points.begin(), s.points.end());
  char title[96];
  std::snprintf(title, sizeof title, "%s GS, omega = %.6g", smoother_name(smoother), omega);
  return line_plot_svg(title, "log10(epsilon)", "rate |E_TL|_a^2", series);
}

struct LowerBoundReport {
  LowerBoundRow row;
  double measured_rate = std::nan("");
};

/// The lower-bound table with the measured point-GS two-level rate per row.
inline std::vector<LowerBoundReport> lower_bound_with_rates(int n0,
                                                            const std::vector<double>& epsilons,
                                                            int level_min, int level_max,
                                                            bool with_rates, double tol = 1e-8,
                                                            int max_iter = 2000,
                                                            std::uint64_t seed = 42) {
  std::vector<LowerBoundReport> out;
  const auto rows = check_lower_bound(n0, epsilons, level_min, level_max);
  for (const auto& r : rows) out.push_back({r, std::nan("")});
  if (!with_rates) return out;

  for (int level = level_min; level <= level_max; ++level) {
    const Hierarchy hier = hierarchy_at_level(n0, 0.0, level);
    const SparseMatrix p = prolongation(hier);
    for (auto& rep : out) {
      if (rep.row.level != level) continue;
      SparseMatrix a = assemble_stiffness(hier.fine, {rep.row.epsilon}, hier.fine_dofs);
      const TwoLevelOperator op(std::move(a), p, SmootherConfig{});
      rep.measured_rate = op.estimate_rate(tol, max_iter, seed).value;
    }
  }
  return out;
}

inline std::string lower_bound_csv(const std::vector<LowerBoundReport>& rows) {
  std::string out = "epsilon,level,h,R,R_scaled,measured_rate\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.10g,%.10g,%.10g\n", r.row.epsilon,
                  r.row.level, r.row.h, r.row.r_value, r.row.r_scaled, r.measured_rate);
    out += buf;
  }
  return out;
}

inline std::string verify_csv(const std::vector<CheckReport>& reports) {
  std::string out = "id,mesh,trials,worst,bound,pass,tol\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.10g,%.10g,%d,%.3g\n", r.id.c_str(), r.mesh.c_str(),
                  r.trials, r.worst, r.bound, r.pass() ? 1 : 0, r.tol);
    out += buf;
  }
  return out;
}

}  // namespace aniso
