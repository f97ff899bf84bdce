#pragma once

#include <string>

namespace kgl {

// Warping profile of the curvature comparison model with sectional curvature
// -k0: f(t) = sinh(sqrt(k0) t)/sqrt(k0), or t when k0 = 0.
double model_f(double k0, double t);
double model_f_dr(double k0, double t);

// c_r(k0, R) = int_0^R f = 2 sinh^2(sqrt(k0) R / 2)/k0, or R^2/2 when k0 = 0.
double model_c_r(double k0, double big_r);

// xi(s) = e^C (1 - e^{-alpha beta s})/(alpha beta). Increasing, xi(0) = 0,
// sup xi = e^C/(alpha beta); satisfies alpha beta xi + xi' = e^C.
struct XiEval {
  double value;
  double dot;
  double ddot;
};
XiEval xi_eval(double alpha, double beta, double big_c, double s);

// Height below which the graph must stay at a point with Killing length
// rho_x: t < (C - log(alpha rho_x)) / (alpha beta).
double region_ceiling(double alpha, double beta, double big_c, double rho_x);

// Smallest admissible beta: n |h| rho_sup + 2 grad_rho_sup.
double beta_min(int n, double h, double rho_sup, double grad_rho_sup);

// Data feeding the gradient estimate for a graph over B_R(p).
struct EstimateInputs {
  int n = 2;             // dim of the base M
  double h = 0.0;        // mean curvature
  double alpha = 2.0;    // > 1
  double beta = 1.0;     // >= beta_min
  double big_c = 1.0;    // > log(alpha rho_sup)
  double u_p = 0.0;      // graph height at the center, >= 0
  double k0 = 0.0;       // sectional curvature of M bounded below by -k0
  double l = 0.0;        // ambient Ricci bounded below by -l on the ball
  double big_r = 1.0;    // ball radius
  double rho_sup = 1.0;  // sup of rho over the ball
  double grad_rho_sup = 0.0;
  double rho_inf = 1.0;
};

// Throws ParameterError naming the violated inequality. Strict inequalities
// are enforced with relative margin 1e-6; beta >= beta_min is exact.
void validate_inputs(const EstimateInputs& in);

struct EstimateConstants {
  double c_r = 0.0;
  double xi_up = 0.0;      // xi(u_p)
  double c0 = 0.0;         // 1/(2 xi(u_p)); +inf when u_p = 0
  double kappa_sup = 0.0;  // grad_rho_sup / rho_inf
  double beta_min = 0.0;
  double a_bar = 0.0;  // A with 2A = (n/c_r) f'(R) + (f(R)/c_r)(n|h| + kappa_sup)
  double k_exp = 0.0;  // max((1 + 1e-6)(A + sqrt(A^2 + c0^2 l))/c0^2, 1e-3)
  double d0 = 0.0;     // max(1, 1/(alpha-1) + 4 f(R)^2 xi^2/((alpha-1)^2 c_r^2))
  double d1 = 0.0;     // sqrt(1 + d0)/rho_inf
  double d = 0.0;      // d1 (e^{k_exp/2} + 1); the gradient bound at the center
  // ball-independent variants
  double a1 = 0.0;      // 2 a1 = n k0 + (n|h| + kappa_sup) sqrt(k0)
  double c1 = 0.0;      // alpha beta/(2 e^C); c0 >= c1 always
  double k_inf = 0.0;   // thresholded like k_exp, from (a1, c1)
  double d0_inf = 0.0;  // max(1, 1/(alpha-1) + 4 k0 xi^2/(alpha-1)^2)
  double d1_inf = 0.0;
  double d_inf = 0.0;
};

// Validates the inputs, then evaluates the whole chain.
EstimateConstants constant_chain(const EstimateInputs& in);

// Barrier profile at distance `dist` from the center and the test function it
// generates on a graph with tilt w = W at that point. eta vanishes outside
// the ball.
struct BarrierDiagnostics {
  double phi = 0.0;  // c_r(k0, R) - c_r(k0, dist)
  double eta = 0.0;  // e^{k_exp phi} - 1, clamped to 0 where phi <= 0
  double u = 0.0;    // eta * w
};
BarrierDiagnostics barrier_diagnostics(double k0, double big_r, double k_exp,
                                       double dist, double w);

}  // namespace kgl
