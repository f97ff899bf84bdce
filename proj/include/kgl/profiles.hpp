#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kgl {

// Smooth scalar profile on r >= 0 with two derivatives.
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;
  virtual double value(double r) const = 0;
  virtual double deriv(double r) const = 0;
  virtual double deriv2(double r) const = 0;
  // Canonical "name(args)" form, used for config round-trips and hashing.
  virtual std::string describe() const = 0;
  // For warping profiles of constant-curvature metrics: that curvature.
  // Lets curvature queries near the pole bypass the cancellation in
  // (1 - fm'^2)/fm^2.
  virtual std::optional<double> constant_curvature() const {
    return std::nullopt;
  }
};

using ProfilePtr = std::shared_ptr<const RadialProfile>;

// ---- warping profiles fm for the metric dr^2 + fm(r)^2 * (round sphere) ----
// fm(0) = 0, fm'(0) = 1.

// fm(r) = r (flat).
ProfilePtr make_euclidean_fm();

// fm(r) = sinh(sqrt(k0) r)/sqrt(k0); constant radial curvature -k0.
ProfilePtr make_hyperbolic_fm(double k0);

// ---- rho profiles (the Killing field length |Y|) ----

// rho(r) = c, c > 0.
ProfilePtr make_constant_rho(double c);

enum class PsiKind { kLog1p, kLinear };

// rho(r) = c + e^{-psi(r)}, c > 0. psi = log(1+r) (kLog1p) or psi = r
// (kLinear). Decreasing, rho -> c, |rho'| <= 1 with the maximum at r = 0.
ProfilePtr make_exp_decay_rho(double c, PsiKind psi);

// Cubic spline (not-a-knot ends) through (r_k, v_k) with strictly increasing
// r_k. Evaluation outside [r_front, r_back] extends linearly with the end
// slope.
ProfilePtr make_table_profile(std::vector<double> r, std::vector<double> v,
                              const std::string& label);

// Two-column text file "r value" per line, '#' comments allowed.
ProfilePtr load_table_profile(const std::string& path);

// Exact global extrema when the profile form provides them.
struct GlobalProfileBounds {
  double sup;        // sup over [0, inf)
  double inf;        // inf over [0, inf)
  double deriv_sup;  // sup of |derivative|
};
std::optional<GlobalProfileBounds> global_bounds(const RadialProfile& p);

}  // namespace kgl
