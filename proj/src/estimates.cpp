#include "kgl/estimates.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "kgl/errors.hpp"

namespace kgl {

double model_f(double k0, double t) {
  if (k0 == 0.0) return t;
  double s = std::sqrt(k0);
  return std::sinh(s * t) / s;
}

double model_f_dr(double k0, double t) {
  if (k0 == 0.0) return 1.0;
  return std::cosh(std::sqrt(k0) * t);
}

double model_c_r(double k0, double big_r) {
  if (k0 == 0.0) return 0.5 * big_r * big_r;
  double s = std::sinh(0.5 * std::sqrt(k0) * big_r);
  return 2.0 * s * s / k0;
}

XiEval xi_eval(double alpha, double beta, double big_c, double s) {
  double ab = alpha * beta;
  XiEval x;
  x.value = -std::exp(big_c) * std::expm1(-ab * s) / ab;
  x.dot = std::exp(big_c - ab * s);
  x.ddot = -ab * x.dot;
  return x;
}

double region_ceiling(double alpha, double beta, double big_c, double rho_x) {
  return (big_c - std::log(alpha * rho_x)) / (alpha * beta);
}

double beta_min(int n, double h, double rho_sup, double grad_rho_sup) {
  return n * std::fabs(h) * rho_sup + 2.0 * grad_rho_sup;
}

namespace {

[[noreturn]] void fail(const std::string& name, const std::string& detail) {
  throw ParameterError(name + " violated: " + detail);
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

void validate_inputs(const EstimateInputs& in) {
  if (in.n < 2) fail("n >= 2", "n = " + std::to_string(in.n));
  if (!(in.big_r > 0.0)) fail("R > 0", "R = " + num(in.big_r));
  if (!(in.k0 >= 0.0)) fail("k0 >= 0", "k0 = " + num(in.k0));
  if (!(in.l >= 0.0)) fail("L >= 0", "L = " + num(in.l));
  if (!(in.u_p >= 0.0)) fail("u(p) >= 0", "u(p) = " + num(in.u_p));
  if (!(in.rho_inf > 0.0)) fail("inf rho > 0", "inf rho = " + num(in.rho_inf));
  if (!(in.rho_sup >= in.rho_inf))
    fail("sup rho >= inf rho", "sup rho = " + num(in.rho_sup) +
                                  ", inf rho = " + num(in.rho_inf));
  if (!(in.grad_rho_sup >= 0.0))
    fail("sup |grad rho| >= 0", "sup |grad rho| = " + num(in.grad_rho_sup));
  if (!(in.alpha > 1.0 + 1e-6))
    fail("alpha > 1", "alpha = " + num(in.alpha) +
                          " (needs relative margin 1e-6)");
  double logc = std::log(in.alpha * in.rho_sup);
  if (!(in.big_c - logc > 1e-6 * std::max(1.0, std::fabs(in.big_c))))
    fail("C > log(alpha sup rho)",
         "C = " + num(in.big_c) + ", log(alpha sup rho) = " + num(logc) +
             " (needs relative margin 1e-6)");
  double bm = beta_min(in.n, in.h, in.rho_sup, in.grad_rho_sup);
  if (!(in.beta >= bm))
    fail("beta >= n |h| sup rho + 2 sup |grad rho|",
         "beta = " + num(in.beta) + ", minimum = " + num(bm));
}

EstimateConstants constant_chain(const EstimateInputs& in) {
  validate_inputs(in);
  EstimateConstants c;
  c.c_r = model_c_r(in.k0, in.big_r);
  c.xi_up = xi_eval(in.alpha, in.beta, in.big_c, in.u_p).value;
  c.c0 = (c.xi_up > 0.0) ? 1.0 / (2.0 * c.xi_up)
                         : std::numeric_limits<double>::infinity();
  c.kappa_sup = in.grad_rho_sup / in.rho_inf;
  c.beta_min = beta_min(in.n, in.h, in.rho_sup, in.grad_rho_sup);

  double fr = model_f(in.k0, in.big_r);
  double fdr = model_f_dr(in.k0, in.big_r);
  double nh = in.n * std::fabs(in.h);
  c.a_bar = 0.5 * ((in.n / c.c_r) * fdr + (fr / c.c_r) * (nh + c.kappa_sup));

  auto threshold = [&](double a, double c_lower) {
    // limit of (a + sqrt(a^2 + c^2 l))/c^2 as c -> inf is 0
    double c2 = c_lower * c_lower;
    if (!std::isfinite(c2)) return 0.0;
    return (a + std::sqrt(a * a + c2 * in.l)) / c2;
  };
  c.k_exp = std::max((1.0 + 1e-6) * threshold(c.a_bar, c.c0), 1e-3);

  double am1 = in.alpha - 1.0;
  c.d0 = std::max(1.0, 1.0 / am1 + 4.0 * fr * fr * c.xi_up * c.xi_up /
                            (am1 * am1 * c.c_r * c.c_r));
  c.d1 = std::sqrt(1.0 + c.d0) / in.rho_inf;
  c.d = c.d1 * (std::exp(0.5 * c.k_exp) + 1.0);

  c.a1 = 0.5 * (in.n * in.k0 + (nh + c.kappa_sup) * std::sqrt(in.k0));
  c.c1 = in.alpha * in.beta / (2.0 * std::exp(in.big_c));
  c.k_inf = std::max((1.0 + 1e-6) * threshold(c.a1, c.c1), 1e-3);
  c.d0_inf = std::max(1.0, 1.0 / am1 + 4.0 * in.k0 * c.xi_up * c.xi_up /
                               (am1 * am1));
  c.d1_inf = std::sqrt(1.0 + c.d0_inf) / in.rho_inf;
  c.d_inf = c.d1_inf * (std::exp(0.5 * c.k_inf) + 1.0);
  return c;
}

BarrierDiagnostics barrier_diagnostics(double k0, double big_r, double k_exp,
                                       double dist, double w) {
  BarrierDiagnostics b;
  b.phi = model_c_r(k0, big_r) - model_c_r(k0, dist);
  b.eta = b.phi > 0.0 ? std::expm1(k_exp * b.phi) : 0.0;
  b.u = b.eta * w;
  return b;
}

}  // namespace kgl
