#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kgl/profiles.hpp"

namespace kgl {

// Point of M in geodesic polar coordinates about the pole p. theta is ignored
// in radial mode.
struct Point {
  double r = 0.0;
  double theta = 0.0;
};

struct RhoBounds {
  double rho_sup = 0.0;       // sup of rho over the ball
  double grad_rho_sup = 0.0;  // sup of |grad rho|
  double rho_inf = 0.0;       // min of rho
  bool has_global = false;    // globals below are exact over all of M
  double global_rho_sup = 0.0;
  double global_grad_rho_sup = 0.0;
  double global_rho_inf = 0.0;
};

// Rotationally symmetric samples of the metric coefficient and rho on a polar
// grid over B_R(p): nodes r_i = i R/nr (i = 0..nr), theta_j = j 2pi/ntheta.
struct PolarGridData {
  double radius = 0.0;
  int nr = 0;
  int ntheta = 0;
  std::vector<double> fm;   // (nr+1) x ntheta, row-major: sqrt of theta-theta coefficient
  std::vector<double> rho;  // (nr+1) x ntheta
};

// Ambient warped product M^n x_rho R. The base M carries the metric
// dr^2 + fm(r)^2 (round sphere), rho = |Y| is the Killing field length, and
// gamma = 1/rho^2. Radial mode evaluates profiles analytically at any point;
// grid mode works from sampled coefficient arrays with finite differences
// (centered second order inside, one-sided second order on the rim).
class WarpedProduct {
 public:
  static WarpedProduct make_radial(int dim_m, ProfilePtr fm, ProfilePtr rho,
                                   std::optional<double> k0 = std::nullopt);
  // Samples the given profiles onto a polar grid; dim_m is forced to 2.
  static WarpedProduct make_grid2d(ProfilePtr fm, ProfilePtr rho, double radius,
                                   int nr, int ntheta,
                                   std::optional<double> k0 = std::nullopt);

  bool is_grid() const { return grid_.has_value(); }
  int dim() const { return dim_m_; }
  double k0() const { return k0_; }
  const PolarGridData& grid() const;

  double rho(Point x) const;
  double gamma(Point x) const;            // 1/rho^2
  double grad_rho_norm(Point x) const;    // |grad rho|
  double kappa(Point x) const;            // |grad rho| / rho
  double kappa_via_gamma(Point x) const;  // (1/(2 gamma)) |grad gamma|

  // Metric coefficient sqrt(sigma_theta_theta) = fm and its r-derivative.
  double fm(Point x) const;
  double fm_dr(Point x) const;

  // gradient components (d_r rho, d_theta rho / fm) in the orthonormal frame
  void grad_rho(Point x, double* radial, double* angular) const;
  void grad_gamma(Point x, double* radial, double* angular) const;

  // Sectional curvatures of M at radius r: radial planes (containing d_r) and
  // tangential planes (two sphere directions; equals radial at the pole).
  double radial_curvature(double r) const;      // -fm''/fm
  double tangential_curvature(double r) const;  // (1 - fm'^2)/fm^2

  // Hessian of rho in the orthonormal frame and the Laplacian.
  double hess_rho_rr(Point x) const;
  double hess_rho_tt(Point x) const;  // unit sphere/theta direction
  double hess_rho_rt(Point x) const;  // mixed; zero in radial mode
  double laplace_rho(Point x) const;

  // sup/inf of rho and |grad rho| over B_R, sampled; global fields filled when
  // the profile's closed form provides exact extrema.
  RhoBounds rho_bounds(double ball_radius, int samples = 4097) const;

  std::string describe() const;

 private:
  WarpedProduct() = default;
  void validate_radial() const;

  // grid finite differences (value arrays indexed i*ntheta+j)
  double g_val(const std::vector<double>& a, int i, int j) const;
  double g_dr(const std::vector<double>& a, int i, int j) const;
  double g_dtheta(const std::vector<double>& a, int i, int j) const;
  double g_drr(const std::vector<double>& a, int i, int j) const;
  double g_dthetatheta(const std::vector<double>& a, int i, int j) const;
  double g_drtheta(const std::vector<double>& a, int i, int j) const;
  void grid_index(Point x, int* i, int* j) const;

  int dim_m_ = 2;
  double k0_ = 0.0;
  ProfilePtr fm_;
  ProfilePtr rho_;
  std::optional<PolarGridData> grid_;
};

struct RicciSamplingOptions {
  int radial_samples = 512;
  int horizontal_directions = 16;  // unit directions in T_xM
  int plane_directions = 64;       // directions in the (horizontal, Y) plane
  double r_floor = 1e-8;           // pole clip for f'/f terms
};

// Smallest L >= 0 with Ric_N(v, v) >= -L for all sampled unit v over B_R(p),
// via Ric_N(v,v) = Ric_M(w,w) - Hess rho(w,w)/rho - <v,Y>^2 Lap rho / rho^3,
// w the horizontal part of v. Nondecreasing in ball_radius.
double ricci_ambient_lower_bound(const WarpedProduct& w, double ball_radius,
                                 const RicciSamplingOptions& opt = {});

}  // namespace kgl
