#include "kgl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "kgl/errors.hpp"

namespace kgl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double require_positive_rho(double v, double r) {
  if (!(v > 0.0))
    throw InvalidGeometryError("rho must stay positive: rho(" +
                               std::to_string(r) + ") = " + std::to_string(v));
  return v;
}

}  // namespace

WarpedProduct WarpedProduct::make_radial(int dim_m, ProfilePtr fm,
                                         ProfilePtr rho,
                                         std::optional<double> k0) {
  if (dim_m < 2) throw InvalidGeometryError("base dimension must be >= 2");
  if (!fm || !rho) throw InvalidGeometryError("missing profile");
  WarpedProduct w;
  w.dim_m_ = dim_m;
  w.fm_ = std::move(fm);
  w.rho_ = std::move(rho);
  w.validate_radial();
  if (k0) {
    if (!(*k0 >= 0.0)) throw InvalidGeometryError("k0 must be >= 0");
    w.k0_ = *k0;
    // supplied bound must dominate the sampled curvature
    double probe = 32.0;
    for (int k = 1; k <= 1024; ++k) {
      double r = probe * k / 1024.0;
      double worst = std::min(w.radial_curvature(r), w.tangential_curvature(r));
      if (worst < -*k0 - 1e-9 * (1.0 + *k0))
        throw InvalidGeometryError("curvature drops below -k0 at r = " +
                                   std::to_string(r));
    }
  } else if (auto cc = w.fm_->constant_curvature()) {
    w.k0_ = std::max(0.0, -*cc);
  } else {
    double probe = 32.0, worst = 0.0;
    for (int k = 1; k <= 2048; ++k) {
      double r = probe * k / 2048.0;
      worst = std::min({worst, w.radial_curvature(r), w.tangential_curvature(r)});
    }
    w.k0_ = -worst;
  }
  return w;
}

WarpedProduct WarpedProduct::make_grid2d(ProfilePtr fm, ProfilePtr rho,
                                         double radius, int nr, int ntheta,
                                         std::optional<double> k0) {
  if (!(radius > 0.0) || nr < 8 || ntheta < 8)
    throw InvalidGeometryError("grid needs radius > 0 and nr, ntheta >= 8");
  WarpedProduct w = make_radial(2, std::move(fm), std::move(rho), k0);
  PolarGridData g;
  g.radius = radius;
  g.nr = nr;
  g.ntheta = ntheta;
  g.fm.resize(static_cast<size_t>(nr + 1) * ntheta);
  g.rho.resize(g.fm.size());
  for (int i = 0; i <= nr; ++i) {
    double r = radius * i / nr;
    double f = w.fm_->value(r);
    double p = require_positive_rho(w.rho_->value(r), r);
    for (int j = 0; j < ntheta; ++j) {
      g.fm[static_cast<size_t>(i) * ntheta + j] = f;
      g.rho[static_cast<size_t>(i) * ntheta + j] = p;
    }
  }
  w.grid_ = std::move(g);
  return w;
}

void WarpedProduct::validate_radial() const {
  if (std::fabs(fm_->value(0.0)) > 1e-9)
    throw InvalidGeometryError("fm(0) must vanish: " + fm_->describe());
  if (std::fabs(fm_->deriv(0.0) - 1.0) > 1e-6)
    throw InvalidGeometryError("fm'(0) must equal 1: " + fm_->describe());
  require_positive_rho(rho_->value(0.0), 0.0);
}

const PolarGridData& WarpedProduct::grid() const {
  if (!grid_) throw DomainError("geometry has no grid representation");
  return *grid_;
}

// ---- grid finite differences ----

void WarpedProduct::grid_index(Point x, int* i, int* j) const {
  const PolarGridData& g = *grid_;
  double dr = g.radius / g.nr;
  double dth = kTwoPi / g.ntheta;
  double fi = x.r / dr;
  double fj = x.theta / dth;
  *i = static_cast<int>(std::lround(fi));
  *j = static_cast<int>(std::lround(fj));
  if (*i < 0 || *i > g.nr || std::fabs(fi - *i) > 1e-6)
    throw DomainError("grid geometry queried off its radial nodes");
  if (std::fabs(fj - *j) > 1e-6)
    throw DomainError("grid geometry queried off its angular nodes");
  *j = ((*j % g.ntheta) + g.ntheta) % g.ntheta;
}

double WarpedProduct::g_val(const std::vector<double>& a, int i, int j) const {
  const PolarGridData& g = *grid_;
  j = ((j % g.ntheta) + g.ntheta) % g.ntheta;
  return a[static_cast<size_t>(i) * g.ntheta + j];
}

double WarpedProduct::g_dr(const std::vector<double>& a, int i, int j) const {
  const PolarGridData& g = *grid_;
  double dr = g.radius / g.nr;
  if (i == 0)
    return (-3.0 * g_val(a, 0, j) + 4.0 * g_val(a, 1, j) - g_val(a, 2, j)) /
           (2.0 * dr);
  if (i == g.nr)
    return (3.0 * g_val(a, i, j) - 4.0 * g_val(a, i - 1, j) +
            g_val(a, i - 2, j)) /
           (2.0 * dr);
  return (g_val(a, i + 1, j) - g_val(a, i - 1, j)) / (2.0 * dr);
}

double WarpedProduct::g_drr(const std::vector<double>& a, int i, int j) const {
  const PolarGridData& g = *grid_;
  double dr = g.radius / g.nr;
  if (i == 0)
    return (2.0 * g_val(a, 0, j) - 5.0 * g_val(a, 1, j) + 4.0 * g_val(a, 2, j) -
            g_val(a, 3, j)) /
           (dr * dr);
  if (i == g.nr)
    return (2.0 * g_val(a, i, j) - 5.0 * g_val(a, i - 1, j) +
            4.0 * g_val(a, i - 2, j) - g_val(a, i - 3, j)) /
           (dr * dr);
  return (g_val(a, i + 1, j) - 2.0 * g_val(a, i, j) + g_val(a, i - 1, j)) /
         (dr * dr);
}

double WarpedProduct::g_dtheta(const std::vector<double>& a, int i,
                               int j) const {
  double dth = kTwoPi / grid_->ntheta;
  return (g_val(a, i, j + 1) - g_val(a, i, j - 1)) / (2.0 * dth);
}

double WarpedProduct::g_dthetatheta(const std::vector<double>& a, int i,
                                    int j) const {
  double dth = kTwoPi / grid_->ntheta;
  return (g_val(a, i, j + 1) - 2.0 * g_val(a, i, j) + g_val(a, i, j - 1)) /
         (dth * dth);
}

double WarpedProduct::g_drtheta(const std::vector<double>& a, int i,
                                int j) const {
  const PolarGridData& g = *grid_;
  double dth = kTwoPi / g.ntheta;
  if (i == 0 || i == g.nr) {
    // one-sided in r applied to the theta-derivative
    double dr = g.radius / g.nr;
    auto dth_at = [&](int ii) {
      return (g_val(a, ii, j + 1) - g_val(a, ii, j - 1)) / (2.0 * dth);
    };
    if (i == 0)
      return (-3.0 * dth_at(0) + 4.0 * dth_at(1) - dth_at(2)) / (2.0 * dr);
    return (3.0 * dth_at(i) - 4.0 * dth_at(i - 1) + dth_at(i - 2)) / (2.0 * dr);
  }
  double dr = g.radius / g.nr;
  return (g_val(a, i + 1, j + 1) - g_val(a, i + 1, j - 1) -
          g_val(a, i - 1, j + 1) + g_val(a, i - 1, j - 1)) /
         (4.0 * dr * dth);
}

// ---- pointwise fields ----

double WarpedProduct::rho(Point x) const {
  if (x.r < 0.0) throw DomainError("negative radius");
  if (grid_) {
    int i, j;
    grid_index(x, &i, &j);
    return require_positive_rho(g_val(grid_->rho, i, j), x.r);
  }
  return require_positive_rho(rho_->value(x.r), x.r);
}

double WarpedProduct::gamma(Point x) const {
  double p = rho(x);
  return 1.0 / (p * p);
}

double WarpedProduct::fm(Point x) const {
  if (grid_) {
    int i, j;
    grid_index(x, &i, &j);
    return g_val(grid_->fm, i, j);
  }
  return fm_->value(x.r);
}

double WarpedProduct::fm_dr(Point x) const {
  if (grid_) {
    int i, j;
    grid_index(x, &i, &j);
    return g_dr(grid_->fm, i, j);
  }
  return fm_->deriv(x.r);
}

void WarpedProduct::grad_rho(Point x, double* radial, double* angular) const {
  if (grid_) {
    int i, j;
    grid_index(x, &i, &j);
    *radial = g_dr(grid_->rho, i, j);
    double f = g_val(grid_->fm, i, j);
    *angular = (i == 0) ? 0.0 : g_dtheta(grid_->rho, i, j) / f;
    return;
  }
  *radial = rho_->deriv(x.r);
  *angular = 0.0;
}

void WarpedProduct::grad_gamma(Point x, double* radial, double* angular) const {
  if (grid_) {
    // differentiate the sampled gamma = 1/rho^2 field itself
    int i, j;
    grid_index(x, &i, &j);
    const PolarGridData& g = *grid_;
    double dr = g.radius / g.nr;
    double dth = kTwoPi / g.ntheta;
    auto gam = [&](int ii, int jj) {
      double p = g_val(g.rho, ii, jj);
      return 1.0 / (p * p);
    };
    if (i == 0)
      *radial = (-3.0 * gam(0, j) + 4.0 * gam(1, j) - gam(2, j)) / (2.0 * dr);
    else if (i == g.nr)
      *radial = (3.0 * gam(i, j) - 4.0 * gam(i - 1, j) + gam(i - 2, j)) /
                (2.0 * dr);
    else
      *radial = (gam(i + 1, j) - gam(i - 1, j)) / (2.0 * dr);
    double f = g_val(g.fm, i, j);
    *angular =
        (i == 0) ? 0.0 : (gam(i, j + 1) - gam(i, j - 1)) / (2.0 * dth) / f;
    return;
  }
  double p = rho_->value(x.r);
  require_positive_rho(p, x.r);
  *radial = -2.0 * rho_->deriv(x.r) / (p * p * p);
  *angular = 0.0;
}

double WarpedProduct::grad_rho_norm(Point x) const {
  double gr, gt;
  grad_rho(x, &gr, &gt);
  return std::hypot(gr, gt);
}

double WarpedProduct::kappa(Point x) const {
  return grad_rho_norm(x) / rho(x);
}

double WarpedProduct::kappa_via_gamma(Point x) const {
  double gr, gt;
  grad_gamma(x, &gr, &gt);
  return 0.5 * std::hypot(gr, gt) / gamma(x);
}

// ---- curvature ----

double WarpedProduct::radial_curvature(double r) const {
  if (grid_) {
    int i = std::max(1, static_cast<int>(std::lround(r / (grid_->radius / grid_->nr))));
    i = std::min(i, grid_->nr - 1);
    return -g_drr(grid_->fm, i, 0) / g_val(grid_->fm, i, 0);
  }
  if (auto cc = fm_->constant_curvature()) return *cc;
  double rr = std::max(r, 1e-8);
  return -fm_->deriv2(rr) / fm_->value(rr);
}

double WarpedProduct::tangential_curvature(double r) const {
  if (auto cc = fm_->constant_curvature()) return *cc;
  if (grid_) return radial_curvature(r);
  double rr = std::max(r, 1e-6);
  double f = fm_->value(rr);
  double fp = fm_->deriv(rr);
  return (1.0 - fp * fp) / (f * f);
}

// ---- Hessian and Laplacian of rho ----

double WarpedProduct::hess_rho_rr(Point x) const {
  if (grid_) {
    int i, j;
    grid_index(x, &i, &j);
    return g_drr(grid_->rho, i, j);
  }
  return rho_->deriv2(x.r);
}

double WarpedProduct::hess_rho_tt(Point x) const {
  if (grid_) {
    int i, j;
    grid_index(x, &i, &j);
    i = std::max(i, 1);
    double f = g_val(grid_->fm, i, j);
    double fr = g_dr(grid_->fm, i, j);
    double ft = g_dtheta(grid_->fm, i, j);
    double pr = g_dr(grid_->rho, i, j);
    double pt = g_dtheta(grid_->rho, i, j);
    double ptt = g_dthetatheta(grid_->rho, i, j);
    return (ptt + f * fr * pr - (ft / f) * pt) / (f * f);
  }
  double rr = std::max(x.r, 1e-8);
  return rho_->deriv(rr) * fm_->deriv(rr) / fm_->value(rr);
}

double WarpedProduct::hess_rho_rt(Point x) const {
  if (grid_) {
    int i, j;
    grid_index(x, &i, &j);
    i = std::max(i, 1);
    double f = g_val(grid_->fm, i, j);
    double fr = g_dr(grid_->fm, i, j);
    double prt = g_drtheta(grid_->rho, i, j);
    double pt = g_dtheta(grid_->rho, i, j);
    return (prt - (fr / f) * pt) / f;
  }
  return 0.0;
}

double WarpedProduct::laplace_rho(Point x) const {
  return hess_rho_rr(x) + (dim_m_ - 1) * hess_rho_tt(x);
}

// ---- bounds over balls ----

RhoBounds WarpedProduct::rho_bounds(double ball_radius, int samples) const {
  if (!(ball_radius > 0.0)) throw DomainError("ball radius must be positive");
  if (samples < 2) throw DomainError("need at least 2 samples");
  RhoBounds b;
  b.rho_sup = -1e300;
  b.rho_inf = 1e300;
  b.grad_rho_sup = 0.0;
  if (grid_) {
    const PolarGridData& g = *grid_;
    if (ball_radius > g.radius * (1.0 + 1e-12))
      throw DomainError("ball exceeds the sampled grid radius");
    double dr = g.radius / g.nr;
    int imax = std::min(g.nr, static_cast<int>(std::floor(ball_radius / dr + 1e-9)));
    for (int i = 0; i <= imax; ++i) {
      for (int j = 0; j < g.ntheta; ++j) {
        Point x{i * dr, j * kTwoPi / g.ntheta};
        double p = require_positive_rho(g_val(g.rho, i, j), x.r);
        b.rho_sup = std::max(b.rho_sup, p);
        b.rho_inf = std::min(b.rho_inf, p);
        b.grad_rho_sup = std::max(b.grad_rho_sup, grad_rho_norm(x));
      }
    }
  } else {
    for (int k = 0; k < samples; ++k) {
      double r = ball_radius * k / (samples - 1);
      double p = require_positive_rho(rho_->value(r), r);
      b.rho_sup = std::max(b.rho_sup, p);
      b.rho_inf = std::min(b.rho_inf, p);
      b.grad_rho_sup = std::max(b.grad_rho_sup, std::fabs(rho_->deriv(r)));
    }
  }
  if (auto gb = global_bounds(*rho_)) {
    b.has_global = true;
    b.global_rho_sup = gb->sup;
    b.global_rho_inf = gb->inf;
    b.global_grad_rho_sup = gb->deriv_sup;
  }
  return b;
}

std::string WarpedProduct::describe() const {
  std::string s = "dim_m=" + std::to_string(dim_m_) + ";fm=" + fm_->describe() +
                  ";rho=" + rho_->describe() + ";k0=" + std::to_string(k0_);
  if (grid_)
    s += ";grid=" + std::to_string(grid_->nr) + "x" +
         std::to_string(grid_->ntheta) + "@" + std::to_string(grid_->radius);
  return s;
}

// ---- ambient Ricci lower bound ----

double ricci_ambient_lower_bound(const WarpedProduct& w, double ball_radius,
                                 const RicciSamplingOptions& opt) {
  if (!(ball_radius > 0.0)) throw DomainError("ball radius must be positive");
  int n = w.dim();
  double worst = 0.0;
  int nr = std::max(2, opt.radial_samples);
  int nh = std::max(2, opt.horizontal_directions);
  int np = std::max(4, opt.plane_directions);

  // theta sampling only matters in grid mode; radial data is symmetric
  int ntheta = w.is_grid() ? 8 : 1;

  for (int it = 0; it < ntheta; ++it) {
    double theta = it * kTwoPi / std::max(1, ntheta);
    if (w.is_grid()) {
      // snap to grid angular nodes
      int jt = static_cast<int>(std::lround(theta / (kTwoPi / w.grid().ntheta)));
      theta = jt * kTwoPi / w.grid().ntheta;
    }
    for (int k = 0; k <= nr; ++k) {
      double r = ball_radius * k / nr;
      if (w.is_grid()) {
        // snap to grid radial nodes, skipping the pole row where the angular
        // stencils degenerate
        double dr = w.grid().radius / w.grid().nr;
        int i = std::max(1, static_cast<int>(std::lround(r / dr)));
        i = std::min(i, w.grid().nr);
        r = i * dr;
      } else {
        r = std::max(r, opt.r_floor);
      }
      Point x{r, theta};
      double p = w.rho(x);
      double lap = w.laplace_rho(x);
      double h_rr = w.hess_rho_rr(x);
      double h_tt = w.hess_rho_tt(x);
      double h_rt = w.hess_rho_rt(x);
      double k_rad = w.radial_curvature(r);
      double k_tan = w.tangential_curvature(r);
      double ric_rr = (n - 1) * k_rad;
      double ric_tt = k_rad + (n - 2) * k_tan;
      for (int a = 0; a < nh; ++a) {
        double psi = 3.14159265358979323846 * a / nh;
        double c = std::cos(psi), s = std::sin(psi);
        double ric_m = c * c * ric_rr + s * s * ric_tt;
        double hess = c * c * h_rr + 2.0 * c * s * h_rt + s * s * h_tt;
        double horiz = ric_m - hess / p;
        double vert = -lap / p;
        for (int b = 0; b < np; ++b) {
          double t = kTwoPi * b / np;
          double st = std::sin(t), ct = std::cos(t);
          double val = st * st * horiz + ct * ct * vert;
          worst = std::min(worst, val);
        }
      }
    }
  }
  return -worst;
}

}  // namespace kgl
