#pragma once

#include <string>
#include <vector>

#include "kgl/geometry.hpp"
#include "kgl/graph_operator.hpp"
#include "kgl/mesh.hpp"

namespace kgl {

// Rotationally symmetric solution of the graph equation on B_R, computed from
// the first integral (J rho u'/W)(r) = nH int_0^r J rho dt, J = fm^{n-1}.
// All integrals are adaptive quadrature; flux holds phi = u'/W with |phi| < 1.
struct RadialSolution {
  int dim = 2;
  double h = 0.0;
  double radius = 0.0;
  double u_center = 0.0;
  std::vector<double> r;       // uniform sample radii including both ends
  std::vector<double> u;
  std::vector<double> uprime;
  std::vector<double> flux;    // phi at the sample radii
  double max_abs_flux = 0.0;   // sup |phi| over a dense scan of [0, R]
  double max_pde_residual = 0.0;  // flux-form residual via 5-point stencil
};

// Throws ExistenceRadiusError (carrying the bisected critical radius) when
// |phi| reaches 1 before `radius`; needs a radial-mode geometry.
RadialSolution solve_radial(const WarpedProduct& g, double h, double radius,
                            double u_center = 0.0, int nsamples = 513);

// Smallest r <= r_max with |phi(r)| = 1, bisected to 1e-12, or +infinity when
// the graph extends past r_max.
double radial_existence_radius(const WarpedProduct& g, double h, double r_max);

struct SolverOptions {
  int max_iterations = 200;      // Newton plus Picard steps combined
  double pde_tol = 1e-10;        // on the max norm of the scaled residual
  double cg_rel_tol = 1e-12;
  int cg_max_iterations = 4000;
  int line_search_max = 30;      // Armijo halvings per Newton step
  int picard_after_failures = 3; // failed Newton steps before frozen-W mode
};

struct SolveReport {
  bool converged = false;
  int newton_iterations = 0;
  int picard_iterations = 0;
  int total_iterations = 0;
  int cg_iterations_total = 0;
  double residual_inf = 0.0;
  double energy = 0.0;
  double area = 0.0;
  double mean_curvature = 0.0;
  double mesh_dr = 0.0;
  double mesh_dtheta = 0.0;
  bool resolution_warning = false;  // some cell has max W / min W > 1.5
  double max_w_cell_ratio = 1.0;
  std::vector<double> step_sizes;   // accepted Newton damping factors

  std::string to_text() const;
};

struct BallSolution {
  PolarMesh mesh;
  std::vector<double> u;
  SolveReport report;
};

// Solves the Dirichlet problem for constant mean curvature h on the ball the
// mesh covers. boundary_values has one entry per spoke of the rim ring. Newton
// with Armijo backtracking on the area-plus-volume energy, Jacobi
// preconditioned CG inner solves, a weighted-harmonic initial guess, and a
// frozen-W Picard fallback after repeated line-search failures. Throws
// SolverError when the iteration budget is exhausted (message carries the
// report).
BallSolution solve_ball(const WarpedProduct& g, const PolarMesh& mesh, double h,
                        const std::vector<double>& boundary_values,
                        const SolverOptions& opt = {});

}  // namespace kgl
