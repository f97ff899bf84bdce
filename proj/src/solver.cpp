#include "kgl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "kgl/errors.hpp"
#include "kgl/quadrature.hpp"

namespace kgl {

namespace {

// first-integral machinery with a cumulative panel cache for Q = int J rho
class RadialFlux {
 public:
  RadialFlux(const WarpedProduct& g, double h, double radius)
      : g_(g), n_(g.dim()), nh_(g.dim() * h), radius_(radius) {
    const int panels = 4096;
    rs_.resize(panels + 1);
    qs_.resize(panels + 1);
    qs_[0] = 0.0;
    for (int i = 0; i <= panels; ++i) rs_[i] = radius * i / panels;
    for (int i = 1; i <= panels; ++i)
      qs_[i] = qs_[i - 1] +
               integrate([this](double t) { return jrho(t); }, rs_[i - 1], rs_[i], 5e-14);
  }

  double jrho(double t) const {
    return std::pow(g_.fm({t, 0.0}), n_ - 1) * g_.rho({t, 0.0});
  }

  double q(double r) const {
    const int panels = static_cast<int>(rs_.size()) - 1;
    int i = std::clamp(static_cast<int>(r / radius_ * panels), 0, panels);
    if (rs_[i] > r && i > 0) --i;
    return qs_[i] + integrate([this](double t) { return jrho(t); }, rs_[i], r, 5e-14);
  }

  double phi(double r) const {
    if (r <= 0.0 || nh_ == 0.0) return 0.0;
    return nh_ * q(r) / jrho(r);
  }

  double uprime(double r) const {
    const double p = phi(r);
    const double s = p * p;
    if (s >= 1.0) return std::numeric_limits<double>::quiet_NaN();
    const double gamma = g_.gamma({r, 0.0});
    return std::copysign(std::sqrt(gamma * s / (1.0 - s)), p);
  }

  double nh() const { return nh_; }
  int dim() const { return n_; }

 private:
  const WarpedProduct& g_;
  int n_;
  double nh_;
  double radius_;
  std::vector<double> rs_, qs_;
};

// first scan point where |phi| >= 1, bisected to 1e-12; NaN when none
double scan_existence(const RadialFlux& fx, double radius, double* max_abs) {
  const int scan = 8192;
  double prev_r = 0.0, worst = 0.0;
  for (int i = 1; i <= scan; ++i) {
    const double r = radius * i / scan;
    const double a = std::abs(fx.phi(r));
    worst = std::max(worst, a);
    if (a >= 1.0) {
      double lo = prev_r, hi = r;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (std::abs(fx.phi(mid)) >= 1.0 ? hi : lo) = mid;
      }
      if (max_abs) *max_abs = worst;
      return 0.5 * (lo + hi);
    }
    prev_r = r;
  }
  if (max_abs) *max_abs = worst;
  return std::numeric_limits<double>::quiet_NaN();
}

void require_radial(const WarpedProduct& g) {
  if (g.is_grid())
    throw DomainError("the radial solver needs a radial-mode geometry");
}

}  // namespace

RadialSolution solve_radial(const WarpedProduct& g, double h, double radius,
                            double u_center, int nsamples) {
  require_radial(g);
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  if (nsamples < 9) throw DomainError("need at least 9 radial samples");

  const RadialFlux fx(g, h, radius);
  double max_abs = 0.0;
  const double rstar = scan_existence(fx, radius, &max_abs);
  if (!std::isnan(rstar)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "radial cmc graph ceases to exist at r = %.12f (|H| too large "
                  "for the ball)",
                  rstar);
    throw ExistenceRadiusError(buf, rstar);
  }

  RadialSolution sol;
  sol.dim = g.dim();
  sol.h = h;
  sol.radius = radius;
  sol.u_center = u_center;
  sol.max_abs_flux = max_abs;
  sol.r.resize(nsamples);
  sol.u.resize(nsamples);
  sol.uprime.resize(nsamples);
  sol.flux.resize(nsamples);

  double acc = u_center;
  for (int i = 0; i < nsamples; ++i) {
    const double r = radius * i / (nsamples - 1);
    sol.r[i] = r;
    if (i > 0)
      acc += integrate([&fx](double t) { return fx.uprime(t); }, sol.r[i - 1], r, 2e-13);
    sol.u[i] = acc;
    sol.uprime[i] = i == 0 ? 0.0 : fx.uprime(r);
    sol.flux[i] = fx.phi(r);
  }

  // flux-form residual phi' + ((n-1) fm'/fm + rho'/rho) phi - nH with an
  // independent 5-point derivative of the quadrature-backed phi
  const double delta = std::min(1e-3, radius / 512.0);
  double worst = 0.0;
  for (int i = 0; i < nsamples; ++i) {
    const double r = sol.r[i];
    if (r < 4.0 * delta || r > radius - 2.0 * delta) continue;
    const double fd = (-fx.phi(r + 2.0 * delta) + 8.0 * fx.phi(r + delta) -
                       8.0 * fx.phi(r - delta) + fx.phi(r - 2.0 * delta)) /
                      (12.0 * delta);
    double pr, pt;
    g.grad_rho({r, 0.0}, &pr, &pt);
    const double drift =
        (g.dim() - 1) * g.fm_dr({r, 0.0}) / g.fm({r, 0.0}) + pr / g.rho({r, 0.0});
    worst = std::max(worst, std::abs(fd + drift * sol.flux[i] - fx.nh()));
  }
  sol.max_pde_residual = worst;
  return sol;
}

double radial_existence_radius(const WarpedProduct& g, double h, double r_max) {
  require_radial(g);
  if (!(r_max > 0.0)) throw DomainError("r_max must be positive");
  const RadialFlux fx(g, h, r_max);
  const double rstar = scan_existence(fx, r_max, nullptr);
  return std::isnan(rstar) ? std::numeric_limits<double>::infinity() : rstar;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Jacobi-preconditioned CG for the masked SPD operator; returns iterations
template <class Apply>
int cg_solve(Apply&& apply, const std::vector<double>& diag,
             const std::vector<double>& b, std::vector<double>& x, double rel_tol,
             int max_iter) {
  const int n = static_cast<int>(b.size());
  x.assign(n, 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return 0;

  std::vector<double> r = b, z(n), p(n), ap(n);
  for (int k = 0; k < n; ++k) z[k] = r[k] / diag[k];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) return it;  // loss of positivity; caller rechecks descent
    const double alpha = rz / pap;
    for (int k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    if (std::sqrt(dot(r, r)) <= rel_tol * bnorm) return it;
    double rz_new = 0.0;
    for (int k = 0; k < n; ++k) {
      z[k] = r[k] / diag[k];
      rz_new += r[k] * z[k];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  return max_iter;
}

// gradient of the quadratic rho-weighted Dirichlet energy, boundary rows
// masked; drives the harmonic-extension initial guess
std::vector<double> quadratic_gradient(const CmcDiscretization& d,
                                       const std::vector<double>& u) {
  const PolarMesh& m = d.mesh();
  const double ar = 2.0 / m.dr(), at = 2.0 / m.dtheta();
  std::vector<double> grad(d.num_nodes(), 0.0);
  const std::vector<int>& cn = d.corners();
  const std::vector<double>& jr = d.jac_rho();
  const std::vector<double>& ifm = d.inv_fm_q();
  for (int cell = 0; cell < d.num_cells(); ++cell) {
    const int* c = &cn[cell * 4];
    const double uc[4] = {u[c[0]], u[c[1]], u[c[2]], u[c[3]]};
    for (int q = 0; q < 4; ++q) {
      const int idx = cell * 4 + q;
      double dxi = 0.0, deta = 0.0;
      for (int k = 0; k < 4; ++k) {
        dxi += d.dshape_dxi(q, k) * uc[k];
        deta += d.dshape_deta(q, k) * uc[k];
      }
      const double g1 = dxi * ar, g2 = deta * at * ifm[idx];
      for (int k = 0; k < 4; ++k)
        grad[c[k]] += jr[idx] * (g1 * d.dshape_dxi(q, k) * ar +
                                 g2 * d.dshape_deta(q, k) * at * ifm[idx]);
    }
  }
  for (int k = 0; k < d.num_nodes(); ++k)
    if (m.boundary(k)) grad[k] = 0.0;
  return grad;
}

OperatorState frozen_state(const OperatorState& s) {
  OperatorState f;
  f.w = s.w;
  f.g1.assign(s.g1.size(), 0.0);
  f.g2.assign(s.g2.size(), 0.0);
  return f;
}

// W variation across one cell width. The bilinear gradient is constant along
// each coordinate within a cell, so the within-cell quadrature spread is blind
// to radial steepening; neighbor cell means carry the signal.
double cell_w_ratio(const OperatorState& s, const PolarMesh& m) {
  const int nt = m.ntheta;
  std::vector<double> mean(m.nr * nt);
  for (int cell = 0; cell < m.nr * nt; ++cell)
    mean[cell] = 0.25 * (s.w[cell * 4] + s.w[cell * 4 + 1] + s.w[cell * 4 + 2] +
                         s.w[cell * 4 + 3]);
  double worst = 1.0;
  auto track = [&worst](double a, double b) {
    worst = std::max(worst, a > b ? a / b : b / a);
  };
  for (int i = 0; i < m.nr; ++i)
    for (int j = 0; j < nt; ++j) {
      if (i + 1 < m.nr) track(mean[i * nt + j], mean[(i + 1) * nt + j]);
      track(mean[i * nt + j], mean[i * nt + (j + 1) % nt]);
    }
  return worst;
}

}  // namespace

std::string SolveReport::to_text() const {
  std::ostringstream os;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "converged: " << (converged ? "yes" : "no") << "\n";
  os << "newton_iterations: " << newton_iterations << "\n";
  os << "picard_iterations: " << picard_iterations << "\n";
  os << "total_iterations: " << total_iterations << "\n";
  os << "cg_iterations_total: " << cg_iterations_total << "\n";
  os << "residual_inf: " << num(residual_inf) << "\n";
  os << "energy: " << num(energy) << "\n";
  os << "area: " << num(area) << "\n";
  os << "mean_curvature: " << num(mean_curvature) << "\n";
  os << "mesh_dr: " << num(mesh_dr) << "\n";
  os << "mesh_dtheta: " << num(mesh_dtheta) << "\n";
  os << "resolution_warning: " << (resolution_warning ? "yes" : "no") << "\n";
  os << "max_w_cell_ratio: " << num(max_w_cell_ratio) << "\n";
  os << "step_sizes:";
  for (double s : step_sizes) os << " " << num(s);
  os << "\n";
  return os.str();
}

BallSolution solve_ball(const WarpedProduct& g, const PolarMesh& mesh, double h,
                        const std::vector<double>& boundary_values,
                        const SolverOptions& opt) {
  const CmcDiscretization d = CmcDiscretization::build(g, mesh);
  const PolarMesh& m = d.mesh();
  if (static_cast<int>(boundary_values.size()) != m.ntheta)
    throw SolverError("boundary data needs one value per rim spoke");
  for (double b : boundary_values)
    if (!std::isfinite(b)) throw SolverError("boundary data must be finite");

  const int nn = m.num_nodes();
  BallSolution out;
  out.mesh = m;
  SolveReport& rep = out.report;
  rep.mean_curvature = h;
  rep.mesh_dr = m.dr();
  rep.mesh_dtheta = m.dtheta();

  std::vector<double>& u = out.u;
  const double bmean =
      std::accumulate(boundary_values.begin(), boundary_values.end(), 0.0) /
      boundary_values.size();
  u.assign(nn, bmean);
  for (int j = 0; j < m.ntheta; ++j) u[m.node(m.nr, j)] = boundary_values[j];

  // rho-weighted harmonic extension as the initial guess
  {
    OperatorState s0;
    s0.w.assign(d.num_cells() * 4, 1.0);
    s0.g1.assign(d.num_cells() * 4, 0.0);
    s0.g2.assign(d.num_cells() * 4, 0.0);
    std::vector<double> b = quadratic_gradient(d, u);
    for (double& v : b) v = -v;
    const std::vector<double> diag = hessian_diag(d, s0);
    std::vector<double> delta;
    rep.cg_iterations_total += cg_solve(
        [&](const std::vector<double>& v, std::vector<double>& av) {
          hessian_apply(d, s0, v, av);
        },
        diag, b, delta, opt.cg_rel_tol, opt.cg_max_iterations);
    for (int k = 0; k < nn; ++k) u[k] += delta[k];
  }

  CmcEval eval = cmc_eval(d, u, h);
  int newton_failures = 0;

  auto solve_step = [&](const OperatorState& state, std::vector<double>& delta) {
    const std::vector<double> diag = hessian_diag(d, state);
    std::vector<double> b = eval.grad;
    for (double& v : b) v = -v;
    rep.cg_iterations_total += cg_solve(
        [&](const std::vector<double>& v, std::vector<double>& av) {
          hessian_apply(d, state, v, av);
        },
        diag, b, delta, opt.cg_rel_tol, opt.cg_max_iterations);
  };

  auto picard_step = [&] {
    std::vector<double> delta;
    solve_step(frozen_state(eval.state), delta);
    for (int k = 0; k < nn; ++k) u[k] += delta[k];
    eval = cmc_eval(d, u, h);
    ++rep.picard_iterations;
  };

  while (rep.total_iterations < opt.max_iterations) {
    if (eval.residual_inf <= opt.pde_tol) {
      rep.converged = true;
      break;
    }
    ++rep.total_iterations;

    if (newton_failures >= opt.picard_after_failures) {
      picard_step();
      continue;
    }

    std::vector<double> delta;
    solve_step(eval.state, delta);

    const double gtd = dot(eval.grad, delta);
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial(nn);
    CmcEval trial_eval;
    if (gtd < 0.0) {
      for (int ls = 0; ls <= opt.line_search_max; ++ls) {
        for (int k = 0; k < nn; ++k) trial[k] = u[k] + t * delta[k];
        trial_eval = cmc_eval(d, trial, h);
        // Armijo on the energy, except near the minimum where the predicted
        // decrease drowns in energy roundoff; there a halved residual is the
        // reliable acceptance signal
        if (trial_eval.energy <= eval.energy + 1e-4 * t * gtd ||
            trial_eval.residual_inf <= 0.5 * eval.residual_inf) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
    }
    if (accepted) {
      u.swap(trial);
      eval = std::move(trial_eval);
      ++rep.newton_iterations;
      rep.step_sizes.push_back(t);
      newton_failures = 0;
    } else {
      ++newton_failures;
      picard_step();
    }
  }

  rep.residual_inf = eval.residual_inf;
  rep.energy = eval.energy;
  rep.area = eval.area;
  rep.max_w_cell_ratio = cell_w_ratio(eval.state, m);
  rep.resolution_warning = rep.max_w_cell_ratio > 1.5;

  if (!rep.converged)
    throw SolverError("cmc solve did not converge within the iteration budget\n" +
                      rep.to_text());
  return out;
}

}  // namespace kgl
