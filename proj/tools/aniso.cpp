// Command-line front end: mesh generation and inspection, convergence-rate
// sweeps with CSV/SVG output, the verification suite, the lower-bound table,
// and a demonstration solver.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "aniso/sweep.hpp"

using namespace aniso;

namespace {

/// Accepts plain radians or pi fractions: "0.5236", "pi", "pi/6", "3pi/4", "0.75pi".
double parse_angle(const std::string& text) {
  const std::size_t pos = text.find("pi");
  if (pos == std::string::npos) {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("cannot parse angle '" + text + "'");
    return v;
  }
  double coeff = 1.0;
  if (pos > 0) coeff = std::stod(text.substr(0, pos));
  double denom = 1.0;
  const std::string rest = text.substr(pos + 2);
  if (!rest.empty()) {
    if (rest[0] != '/') throw std::invalid_argument("cannot parse angle '" + text + "'");
    denom = std::stod(rest.substr(1));
  }
  return coeff * kPi / denom;
}

std::pair<int, int> parse_levels(const std::string& text) {
  const std::size_t dots = text.find("..");
  if (dots == std::string::npos) {
    const int k = std::stoi(text);
    return {k, k};
  }
  return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string svg_path_for(const std::string& base, int omega_index) {
  const std::size_t dot = base.rfind('.');
  const std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
  const std::string ext = dot == std::string::npos ? ".svg" : base.substr(dot);
  return stem + "_om" + std::to_string(omega_index) + ext;
}

SmootherKind parse_smoother(const std::string& s) {
  if (s == "point") return SmootherKind::point_gs;
  if (s == "line") return SmootherKind::line_gs;
  throw std::invalid_argument("expected smoother point|line, got '" + s + "'");
}

SweepOrdering parse_ordering(const std::string& s) {
  if (s == "forward") return SweepOrdering::forward;
  if (s == "backward") return SweepOrdering::backward;
  if (s == "symmetric") return SweepOrdering::symmetric;
  throw std::invalid_argument("expected ordering forward|backward|symmetric");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-level multigrid laboratory for anisotropic diffusion"};
  app.require_subcommand(1);

  // ---- mesh ----
  auto* mesh_cmd = app.add_subcommand("mesh", "generate, refine, jitter, or inspect meshes");
  mesh_cmd->require_subcommand(1);

  int n0 = 4;
  std::string omega_text = "0";
  std::string out_path, mesh_file;
  auto* gen = mesh_cmd->add_subcommand("gen", "rotated uniform triangulation of the square");
  gen->add_option("--n0", n0, "squares per side");
  gen->add_option("--omega", omega_text, "rotation angle (radians or pi fractions)");
  gen->add_option("--out", out_path, "output mesh file")->required();

  int refine_times = 1;
  auto* refine = mesh_cmd->add_subcommand("refine", "regular refinement of a mesh file");
  refine->add_option("--mesh-file", mesh_file, "input mesh")->required();
  refine->add_option("--times", refine_times, "number of refinements");
  refine->add_option("--out", out_path, "output mesh file")->required();

  double amplitude = 0.2;
  std::uint64_t seed = 42;
  auto* jitter = mesh_cmd->add_subcommand("jitter", "displace interior vertices");
  jitter->add_option("--mesh-file", mesh_file, "input mesh")->required();
  jitter->add_option("--amplitude", amplitude, "fraction of h_char, at most 0.3");
  jitter->add_option("--seed", seed, "random seed");
  jitter->add_option("--out", out_path, "output mesh file")->required();

  double strip_width = 0.0;
  auto* info = mesh_cmd->add_subcommand("info", "mesh statistics");
  info->add_option("--mesh-file", mesh_file, "input mesh")->required();
  info->add_option("--strip-width", strip_width, "width used for the strip count (default h_char)");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "rate sweep over omega/level/epsilon/smoother");
  std::vector<std::string> omega_list, smoother_list;
  std::vector<double> eps_list;
  std::string levels_text = "1..5", ordering_text = "forward";
  std::string out_csv, out_svg;
  double tol = 1e-8;
  int max_iter = 2000;
  bool big = false;
  sweep_cmd->add_option("--n0", n0, "base grid (squares per side)");
  sweep_cmd->add_option("--omega", omega_list, "rotation angle, repeatable");
  sweep_cmd->add_option("--levels", levels_text, "level range, e.g. 1..5");
  sweep_cmd->add_option("--eps", eps_list, "anisotropy ratio, repeatable");
  sweep_cmd->add_option("--smoother", smoother_list, "point|line, repeatable");
  sweep_cmd->add_option("--ordering", ordering_text, "forward|backward|symmetric");
  sweep_cmd->add_option("--strip-width", strip_width, "line-smoother strip width (default fine h_char)");
  sweep_cmd->add_option("--seed", seed, "power-iteration start seed");
  sweep_cmd->add_option("--tol", tol, "power-iteration tolerance");
  sweep_cmd->add_option("--max-iter", max_iter, "power-iteration cap");
  sweep_cmd->add_option("--out-csv", out_csv, "CSV output path");
  sweep_cmd->add_option("--out-svg", out_svg, "SVG output path (one file per omega)");
  sweep_cmd->add_flag("--big", big, "allow levels above 5");

  // ---- verify ----
  auto* verify_cmd = app.add_subcommand("verify", "numerical checks of the identities and lemmas");
  int trials = 100;
  bool corrupt = false;
  verify_cmd->add_option("--n0", n0, "base grid");
  verify_cmd->add_option("--omega", omega_text, "rotation angle");
  verify_cmd->add_option("--trials", trials, "random trials per check (0: identities only)");
  verify_cmd->add_option("--seed", seed, "random seed");
  verify_cmd->add_option("--strip-width", strip_width, "strip width (default fine h_char)");
  verify_cmd->add_option("--out-csv", out_csv, "CSV output path");
  verify_cmd->add_flag("--corrupt-prolongation", corrupt, "fault-injection test hook")
      ->group("");  // hidden

  // ---- lower-bound ----
  auto* lb_cmd = app.add_subcommand("lower-bound", "aligned-grid lower-bound table (omega = 0)");
  std::string lb_levels = "2..4";
  bool no_rates = false;
  lb_cmd->add_option("--n0", n0, "base grid");
  lb_cmd->add_option("--eps", eps_list, "anisotropy ratio, repeatable");
  lb_cmd->add_option("--levels", lb_levels, "level range, e.g. 2..4");
  lb_cmd->add_option("--tol", tol, "power-iteration tolerance");
  lb_cmd->add_option("--max-iter", max_iter, "power-iteration cap");
  lb_cmd->add_option("--seed", seed, "power-iteration seed");
  lb_cmd->add_option("--out-csv", out_csv, "CSV output path");
  lb_cmd->add_flag("--no-rates", no_rates, "skip the measured point-GS rate column");

  // ---- solve ----
  auto* solve_cmd = app.add_subcommand("solve", "run the two-level iteration as a solver");
  int level = 1;
  double eps = 1e-4;
  std::string smoother_text = "line";
  solve_cmd->add_option("--n0", n0, "base grid");
  solve_cmd->add_option("--omega", omega_text, "rotation angle");
  solve_cmd->add_option("--level", level, "refinement level (fine N = n0 * 2^level)");
  solve_cmd->add_option("--eps", eps, "anisotropy ratio");
  solve_cmd->add_option("--smoother", smoother_text, "point|line");
  solve_cmd->add_option("--ordering", ordering_text, "forward|backward|symmetric");
  solve_cmd->add_option("--strip-width", strip_width, "strip width (default fine h_char)");
  solve_cmd->add_option("--tol", tol, "relative residual target");
  solve_cmd->add_option("--max-iter", max_iter, "iteration cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const Mesh m = build_rotated_uniform({n0, parse_angle(omega_text)});
      write_file(out_path, save_mesh(m));
      std::printf("wrote %s: %d vertices, %d triangles, h_char %.6g\n", out_path.c_str(),
                  m.vertex_count(), m.triangle_count(), m.h_char);
    } else if (refine->parsed()) {
      Mesh m = load_mesh(read_file(mesh_file));
      for (int k = 0; k < refine_times; ++k) m = refine_regular(m).fine;
      write_file(out_path, save_mesh(m));
      std::printf("wrote %s: %d vertices, %d triangles\n", out_path.c_str(), m.vertex_count(),
                  m.triangle_count());
    } else if (jitter->parsed()) {
      const Mesh m = jitter_interior(load_mesh(read_file(mesh_file)), amplitude, seed);
      write_file(out_path, save_mesh(m));
      std::printf("wrote %s\n", out_path.c_str());
    } else if (info->parsed()) {
      const Mesh m = load_mesh(read_file(mesh_file));
      auto [ylo, yhi] = y_extent(m);
      const double w = strip_width > 0.0 ? strip_width : m.h_char;
      const int nb = [&] {
        int c = 0;
        for (auto b : m.boundary) c += b;
        return c;
      }();
      std::printf("vertices    %d (%d boundary)\n", m.vertex_count(), nb);
      std::printf("triangles   %d\n", m.triangle_count());
      std::printf("h_char      %.12g\n", m.h_char);
      std::printf("y extent    [%.12g, %.12g]\n", ylo, yhi);
      std::printf("strip width %.12g -> L = %d\n", w,
                  static_cast<int>(std::floor((yhi - ylo) / w)));
    } else if (sweep_cmd->parsed()) {
      SweepSpec spec;
      spec.n0 = n0;
      if (!omega_list.empty()) {
        spec.omegas.clear();
        for (const auto& o : omega_list) spec.omegas.push_back(parse_angle(o));
      }
      auto [lmin, lmax] = parse_levels(levels_text);
      if (lmax > 5 && !big)
        throw std::runtime_error("levels above 5 are expensive; pass --big to allow them");
      spec.level_min = lmin;
      spec.level_max = lmax;
      if (!eps_list.empty()) spec.epsilons = eps_list;
      if (!smoother_list.empty()) {
        spec.smoothers.clear();
        for (const auto& s : smoother_list) spec.smoothers.push_back(parse_smoother(s));
      }
      spec.ordering = parse_ordering(ordering_text);
      spec.strip_width = strip_width;
      spec.seed = seed;
      spec.tol = tol;
      spec.max_iter = max_iter;

      const auto rows = run_sweep(spec);
      const std::string csv = sweep_csv(rows);
      if (out_csv.empty())
        std::fputs(csv.c_str(), stdout);
      else
        write_file(out_csv, csv);
      if (!out_svg.empty()) {
        for (std::size_t oi = 0; oi < spec.omegas.size(); ++oi) {
          for (SmootherKind kind : spec.smoothers) {
            std::string path = svg_path_for(out_svg, static_cast<int>(oi));
            if (spec.smoothers.size() > 1) {
              const std::size_t dot = path.rfind('.');
              path.insert(dot, std::string("_") + smoother_name(kind));
            }
            write_file(path, sweep_svg(rows, spec.omegas[oi], kind));
            std::printf("wrote %s\n", path.c_str());
          }
        }
      }
      int failures = 0;
      for (const auto& row : rows)
        if (row.failed) ++failures;
      if (failures > 0) std::fprintf(stderr, "%d case(s) failed; see converged column\n", failures);
    } else if (verify_cmd->parsed()) {
      const Hierarchy h = hierarchy_at_level(n0, parse_angle(omega_text), 1);
      const double w = strip_width > 0.0 ? strip_width : h.fine.h_char;
      const StripDecomposition strips = build_strips(h.fine, h.fine_dofs, w);
      VerifyOptions opt;
      opt.trials = trials;
      opt.seed = seed;
      opt.corrupt_prolongation = corrupt;
      const VerifySummary s = run_verify_suite(h, strips, opt);
      std::printf("%-26s %12s %12s  %s\n", "check", "worst", "bound", "status");
      for (const auto& r : s.reports)
        std::printf("%-26s %12.5g %12.5g  %s\n", r.id.c_str(), r.worst, r.bound,
                    r.pass() ? "pass" : "FAIL");
      if (!s.inequalities_run)
        std::printf("(trials = 0: inequality checks skipped)\n");
      if (!out_csv.empty()) write_file(out_csv, verify_csv(s.reports));
      return s.hard_fail ? 1 : 0;
    } else if (lb_cmd->parsed()) {
      if (eps_list.empty())
        eps_list = {1e0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
      auto [lmin, lmax] = parse_levels(lb_levels);
      const auto rows =
          lower_bound_with_rates(n0, eps_list, lmin, lmax, !no_rates, tol, max_iter, seed);
      std::printf("%10s %5s %10s %12s %12s %12s\n", "epsilon", "level", "h", "R", "R*(eps+h^2)",
                  "point rate");
      for (const auto& r : rows)
        std::printf("%10.3g %5d %10.5g %12.6g %12.6g %12.6g\n", r.row.epsilon, r.row.level,
                    r.row.h, r.row.r_value, r.row.r_scaled, r.measured_rate);
      if (!out_csv.empty()) write_file(out_csv, lower_bound_csv(rows));
    } else if (solve_cmd->parsed()) {
      const Hierarchy h = hierarchy_at_level(n0, parse_angle(omega_text), level);
      const SparseMatrix a = assemble_stiffness(h.fine, {eps}, h.fine_dofs);
      const SparseMatrix p = prolongation(h);
      const double w = strip_width > 0.0 ? strip_width : h.fine.h_char;
      StripDecomposition strips;
      const SmootherKind kind = parse_smoother(smoother_text);
      if (kind == SmootherKind::line_gs) strips = build_strips(h.fine, h.fine_dofs, w);
      SmootherConfig cfg{kind, 1, parse_ordering(ordering_text),
                         kind == SmootherKind::line_gs ? &strips : nullptr};
      const TwoLevelOperator op(a, p, cfg);
      const Vector b = assemble_load(h.fine, h.fine_dofs);
      const auto result = op.solve(b, tol, max_iter);
      std::printf("dofs %d, iterations %d, converged %s\n",
                  static_cast<int>(h.fine_dofs.size()), result.iterations,
                  result.converged ? "yes" : "no");
      for (std::size_t i = 0; i < result.residual_history.size(); ++i)
        std::printf("  residual[%zu] = %.6e\n", i, result.residual_history[i]);
      return result.converged ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
