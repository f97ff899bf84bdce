#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kgl/config.hpp"
#include "kgl/errors.hpp"
#include "kgl/estimates.hpp"
#include "kgl/geometry.hpp"
#include "kgl/harness.hpp"
#include "kgl/report.hpp"
#include "kgl/solver.hpp"

namespace fs = std::filesystem;
using namespace kgl;

namespace {

// exit codes: 0 pass, 1 assertion failure, 2 hypotheses unmet or no
// conclusion, 3 configuration error
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "hypotheses unmet: %s\n", e.what());
    return 2;
  } catch (const ExistenceRadiusError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

int cmd_solve(const std::string& config_path, double h, double big_r, bool radial,
              const std::string& out_dir, int nr, int ntheta, double boundary) {
  const GeometryConfig cfg = load_geometry_config(config_path);
  const WarpedProduct g = make_geometry(cfg);
  fs::create_directories(out_dir);

  if (radial) {
    const RadialSolution sol = solve_radial(g, h, big_r);
    CsvTable t({"r", "u", "uprime", "flux"});
    for (std::size_t i = 0; i < sol.r.size(); ++i)
      t.add_row(sol.r[i], sol.u[i], sol.uprime[i], sol.flux[i]);
    const std::string path = (fs::path(out_dir) / "fields_radial.csv").string();
    t.write(path);
    std::printf("radial solve: R=%g H=%g samples=%zu max|flux|=%.3e residual=%.3e\n",
                big_r, h, sol.r.size(), sol.max_abs_flux, sol.max_pde_residual);
    std::printf("wrote %s\n", path.c_str());
    return 0;
  }

  const PolarMesh mesh = PolarMesh::make(big_r, nr, ntheta);
  const std::vector<double> bdry(static_cast<std::size_t>(mesh.ntheta), boundary);
  const BallSolution sol = solve_ball(g, mesh, h, bdry);
  const std::string fpath = (fs::path(out_dir) / "fields_solution.csv").string();
  fields_table(g, mesh, sol.u, h).write(fpath);
  const std::string rpath = (fs::path(out_dir) / "solve_report.txt").string();
  write_text_file(rpath, sol.report.to_text());
  std::fputs(sol.report.to_text().c_str(), stdout);
  std::printf("wrote %s\n", fpath.c_str());
  return sol.report.converged ? 0 : 2;
}

int cmd_constants(const std::string& config_path, double alpha, double beta,
                  double big_c, double u_p, double big_r, double h,
                  double ell, bool ell_given) {
  const GeometryConfig cfg = load_geometry_config(config_path);
  const WarpedProduct g = make_geometry(cfg);
  const RhoBounds rb = g.rho_bounds(big_r);

  EstimateInputs in;
  in.n = g.dim();
  in.h = h;
  in.alpha = alpha;
  in.beta = beta;
  in.big_c = big_c;
  in.u_p = u_p;
  in.k0 = g.k0();
  in.l = ell_given ? ell : ricci_ambient_lower_bound(g, big_r) + 0.0;
  in.big_r = big_r;
  in.rho_sup = rb.rho_sup;
  in.grad_rho_sup = rb.grad_rho_sup;
  in.rho_inf = rb.rho_inf;

  const EstimateConstants c = constant_chain(in);
  CsvTable t({"alpha", "beta", "big_c", "u_p", "k0", "ell", "R", "c_r", "c0",
              "a_bar", "k_exp", "d0", "d1", "d"});
  t.add_row(in.alpha, in.beta, in.big_c, in.u_p, in.k0, in.l, in.big_r, c.c_r,
            c.c0, c.a_bar, c.k_exp, c.d0, c.d1, c.d);
  std::fputs(t.to_text().c_str(), stdout);
  return 0;
}

int cmd_exp(const std::string& name, const std::string& config_path,
            const std::string& out_dir, bool plots) {
  const GeometryConfig cfg = load_geometry_config(config_path);
  ExperimentOptions opt;
  opt.out_dir = out_dir;
  opt.plots = plots;
  const ExperimentReport rep = run_experiment(name, cfg, opt);

  int passes = 0, fails = 0, unmet = 0;
  for (const auto& row : rep.rows) {
    if (row.verdict == "pass") ++passes;
    if (row.verdict == "fail") ++fails;
    if (row.verdict == "unmet") ++unmet;
  }
  std::printf("%s on %s [%s] rows=%zu pass=%d fail=%d unmet=%d\n",
              rep.experiment.c_str(), rep.geometry_id.c_str(),
              rep.verdict.c_str(), rep.rows.size(), passes, fails, unmet);
  if (!out_dir.empty())
    std::printf("wrote %s\n", (fs::path(out_dir) / "report.csv").string().c_str());
  return rep.exit_code();
}

int cmd_region_check(const std::string& config_path, const std::string& solution_path,
                     double alpha, double beta, double big_c, bool big_c_given) {
  const GeometryConfig cfg = load_geometry_config(config_path);
  const WarpedProduct g = make_geometry(cfg);

  std::ifstream in(solution_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read solution file '" + solution_path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty solution file");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  const std::vector<std::string> header = split(line);
  int col_r = -1, col_theta = -1, col_u = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "r") col_r = i;
    if (header[i] == "theta") col_theta = i;
    if (header[i] == "u") col_u = i;
  }
  if (col_r < 0 || col_theta < 0 || col_u < 0)
    throw ConfigError("solution file needs columns r, theta, u");

  std::vector<Point> xs;
  std::vector<double> u;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    const int need = std::max(col_r, std::max(col_theta, col_u));
    if (static_cast<int>(cells.size()) <= need)
      throw ConfigError("short row in solution file");
    try {
      xs.push_back({std::stod(cells[col_r]), std::stod(cells[col_theta])});
      u.push_back(std::stod(cells[col_u]));
    } catch (const std::exception&) {
      throw ConfigError("non-numeric cell in solution file");
    }
  }
  if (xs.empty()) throw ConfigError("solution file has no data rows");

  if (!big_c_given) {
    // smallest natural region containing nonnegative data: ceiling half a
    // unit above the largest sample
    double hi = 0.0;
    for (double v : u) hi = std::max(hi, v);
    double rho_sup = 0.0;
    for (const Point& x : xs) rho_sup = std::max(rho_sup, g.rho(x));
    big_c = std::log(alpha * rho_sup) + alpha * beta * hi + 0.5;
  }

  const RegionCheck rc = region_check(g, xs, u, alpha, beta, big_c);
  std::printf("region: alpha=%g beta=%g C=%.17g\n", alpha, beta, big_c);
  std::printf("checked=%d violations=%d min_u=%.3e worst_margin=%.3e at (r=%g, theta=%g)\n",
              rc.checked, rc.violations, rc.min_u, rc.worst_margin, rc.worst_r,
              rc.worst_theta);
  std::printf("%s\n", rc.in_region ? "inside the region" : "outside the region");
  return rc.in_region ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-mean-curvature Killing graphs on warped products: "
               "solvers, gradient-estimate constants, experiments"};
  app.require_subcommand(0, 1);

  std::string config_path, out_dir, solution_path, exp_name;
  double h = 0.0, big_r = 1.0;
  double alpha = 2.0, beta = 1.0, big_c = 0.0, u_p = 0.0, ell = 0.0;
  int nr = 96, ntheta = 48;
  double boundary = 0.0;
  bool radial = false, plots = false;

  CLI::App* solve = app.add_subcommand(
      "solve", "solve one Dirichlet problem on a geodesic ball");
  solve->add_option("--config", config_path, "geometry description file")
      ->required();
  solve->add_option("--H", h, "prescribed mean curvature")->required();
  solve->add_option("--R", big_r, "ball radius")->required();
  solve->add_flag("--radial", radial, "first-integral radial solve");
  solve->add_option("--out", out_dir, "output directory")->required();
  solve->add_option("--nr", nr, "radial cells (2D solve)");
  solve->add_option("--ntheta", ntheta, "angular cells (2D solve)");
  solve->add_option("--boundary", boundary, "constant Dirichlet value (2D solve)");

  CLI::App* constants = app.add_subcommand(
      "constants", "evaluate the gradient-bound constant chain");
  constants->add_option("--config", config_path, "geometry description file")
      ->required();
  constants->add_option("--alpha", alpha, "region parameter alpha")->required();
  constants->add_option("--beta", beta, "region parameter beta")->required();
  constants->add_option("--C", big_c, "region constant C")->required();
  constants->add_option("--up", u_p, "height at the center point")->required();
  constants->add_option("--R", big_r, "ball radius")->required();
  constants->add_option("--H", h, "prescribed mean curvature");
  CLI::Option* ell_opt =
      constants->add_option("--L", ell, "ambient Ricci lower bound override");

  CLI::App* exp = app.add_subcommand("exp", "run one experiment sweep");
  exp->add_option("name", exp_name,
                  "gradient-bound | rigidity | slab-minimal | identities")
      ->required();
  exp->add_option("--config", config_path, "geometry description file")
      ->required();
  exp->add_option("--out", out_dir, "output directory")->required();
  exp->add_flag("--plots", plots, "also write SVG line plots");

  CLI::App* region = app.add_subcommand(
      "region-check", "test a solved field against the height region");
  region->add_option("--config", config_path, "geometry description file")
      ->required();
  region->add_option("--solution", solution_path, "fields CSV with r,theta,u")
      ->required();
  region->add_option("--alpha", alpha, "region parameter alpha");
  region->add_option("--beta", beta, "region parameter beta");
  CLI::Option* big_c_opt =
      region->add_option("--C", big_c, "region constant C (default: fitted)");

  CLI11_PARSE(app, argc, argv);
  if (app.get_subcommands().empty()) {
    std::puts(app.help().c_str());
    return 0;
  }

  if (solve->parsed())
    return guarded([&] {
      return cmd_solve(config_path, h, big_r, radial, out_dir, nr, ntheta,
                       boundary);
    });
  if (constants->parsed())
    return guarded([&] {
      return cmd_constants(config_path, alpha, beta, big_c, u_p, big_r, h, ell,
                           ell_opt->count() > 0);
    });
  if (exp->parsed())
    return guarded([&] { return cmd_exp(exp_name, config_path, out_dir, plots); });
  return guarded([&] {
    return cmd_region_check(config_path, solution_path, alpha, beta, big_c,
                            big_c_opt->count() > 0);
  });
}
