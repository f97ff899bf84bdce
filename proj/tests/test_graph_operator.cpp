#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "kgl/errors.hpp"
#include "kgl/geometry.hpp"
#include "kgl/graph_operator.hpp"
#include "kgl/mesh.hpp"
#include "kgl/quadrature.hpp"

using namespace kgl;

namespace {

WarpedProduct flat_unit() {
  return WarpedProduct::make_radial(2, make_euclidean_fm(), make_constant_rho(1.0));
}

WarpedProduct warped() {
  return WarpedProduct::make_radial(2, make_hyperbolic_fm(1.0),
                                    make_exp_decay_rho(1.0, PsiKind::kLog1p));
}

template <class F>
std::vector<double> sample(const PolarMesh& m, F&& f) {
  std::vector<double> v(m.num_nodes());
  for (int k = 0; k < m.num_nodes(); ++k) v[k] = f(m.r(k), m.theta(k));
  return v;
}

double smooth_test_field(double r, double th) {
  return 0.25 * r * r + 0.1 * r * r * r * std::cos(th) -
         0.15 * r * r * std::sin(2.0 * th) + 0.3 * std::sin(1.3 * r) * std::cos(th);
}

}  // namespace

TEST_CASE("polar mesh indexing") {
  const PolarMesh m = PolarMesh::make(2.0, 8, 16);
  CHECK(m.num_nodes() == 129);
  CHECK(m.num_interior() == 113);
  CHECK(m.node(0, 5) == 0);
  CHECK(m.node(3, 18) == m.node(3, 2));
  CHECK(m.node(2, -1) == m.node(2, 15));
  for (int k = 0; k < m.num_nodes(); ++k) {
    CHECK(m.node(m.ring(k), m.spoke(k)) == k);
    CHECK(m.boundary(k) == (m.ring(k) == 8));
  }
  CHECK(m.r(m.node(4, 0)) == doctest::Approx(1.0));
  CHECK(m.theta(m.node(4, 4)) == doctest::Approx(M_PI / 2));
  CHECK_THROWS_AS(PolarMesh::make(0.0, 8, 16), DiscretizationError);
  CHECK_THROWS_AS(PolarMesh::make(1.0, 3, 16), DiscretizationError);
  CHECK_THROWS_AS(PolarMesh::make(1.0, 8, 7), DiscretizationError);
}

TEST_CASE("unit normal decomposition at a point") {
  // |grad u|^2 = gamma splits the normal energy evenly
  const GaussPoint p = gauss_point(0.7, 0.7);
  CHECK(p.w == doctest::Approx(std::sqrt(1.4)).epsilon(1e-15));
  CHECK(p.y_tan_sq == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(std::abs(p.unit_defect) < 1e-15);

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> ug(0.05, 20.0), us(0.0, 100.0);
  double worst_defect = 0.0, worst_tan = 0.0;
  for (int s = 0; s < 20000; ++s) {
    const double gamma = ug(rng);
    const GaussPoint q = gauss_point(gamma, us(rng));
    worst_defect = std::max(worst_defect, std::abs(q.unit_defect));
    // gamma |Y^T|^2 = y_tan_sq / gamma never exceeds 1
    worst_tan = std::max(worst_tan, q.y_tan_sq / gamma);
    CHECK(q.w * q.inv_w == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(worst_defect < 1e-14);
  CHECK(worst_tan <= 1.0 + 1e-14);
}

TEST_CASE("induced metric eigenvalue window") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> ul(-1.5, 1.5), uc(-0.9, 0.9), uu(-5.0, 5.0),
      ug(0.05, 10.0);
  double worst_lo = 0.0, worst_hi = 0.0;
  for (int s = 0; s < 10000; ++s) {
    Metric2 sig;
    sig.a11 = std::exp(ul(rng));
    sig.a22 = std::exp(ul(rng));
    sig.a12 = uc(rng) * std::sqrt(sig.a11 * sig.a22);
    const double u1 = uu(rng), u2 = uu(rng), gamma = ug(rng);

    const Metric2 g = induced_metric_contravariant(sig, u1, u2, gamma);
    CHECK(g.a11 > 0.0);
    CHECK(g.a11 * g.a22 - g.a12 * g.a12 > 0.0);

    const double det = sig.a11 * sig.a22 - sig.a12 * sig.a12;
    const double i11 = sig.a22 / det, i12 = -sig.a12 / det, i22 = sig.a11 / det;
    const double gsq = i11 * u1 * u1 + 2.0 * i12 * u1 * u2 + i22 * u2 * u2;
    const double w2 = gamma + gsq;

    const EigenPair e = induced_metric_relative_eigenvalues(sig, u1, u2, gamma);
    worst_lo = std::max(worst_lo, std::abs(e.lo - gamma / w2));
    worst_hi = std::max(worst_hi, std::abs(e.hi - 1.0));
    CHECK(e.lo <= e.hi);
  }
  CHECK(worst_lo < 1e-9);
  CHECK(worst_hi < 1e-9);
  CHECK_THROWS_AS(induced_metric_contravariant({1.0, 2.0, 1.0}, 0.0, 0.0, 1.0),
                  DomainError);
}

TEST_CASE("volume element against closed forms") {
  const WarpedProduct flat = flat_unit();
  const PolarMesh m = PolarMesh::make(2.0, 64, 64);
  const CmcDiscretization d = CmcDiscretization::build(flat, m);

  const std::vector<double> ones(m.num_nodes(), 1.0);
  CHECK(weighted_volume(d, ones) == doctest::Approx(4.0 * M_PI).epsilon(1e-12));

  // graphs of affine functions scale the volume element by a constant W
  const double b = 0.4;
  const double wc = std::sqrt(1.0 + b * b);
  const std::vector<double> wfield(m.num_nodes(), wc);
  CHECK(std::abs(weighted_volume(d, wfield) - 4.0 * M_PI * wc) < 1e-6);

  const WarpedProduct decay =
      WarpedProduct::make_radial(2, make_euclidean_fm(),
                                 make_exp_decay_rho(1.0, PsiKind::kLinear));
  const CmcDiscretization dd = CmcDiscretization::build(decay, m);
  const double exact = 2.0 * M_PI *
                       integrate([](double r) { return (1.0 + std::exp(-r)) * r; },
                                 0.0, 2.0, 1e-13);
  CHECK(weighted_volume(dd, ones) == doctest::Approx(exact).epsilon(1e-7));
}

TEST_CASE("affine graph area converges at second order") {
  const WarpedProduct flat = flat_unit();
  const double b = 0.4;
  const double exact = 4.0 * M_PI * std::sqrt(1.0 + b * b);
  auto affine = [&](double r, double th) { return 0.1 + b * r * std::cos(th); };

  double err[2];
  const int nside[2] = {48, 96};
  for (int t = 0; t < 2; ++t) {
    const PolarMesh m = PolarMesh::make(2.0, nside[t], nside[t]);
    const CmcDiscretization d = CmcDiscretization::build(flat, m);
    err[t] = std::abs(graph_area(d, sample(m, affine)) - exact);
  }
  CHECK(err[1] < 5e-4 * exact);
  CHECK(err[0] / err[1] > 3.4);
  CHECK(err[0] / err[1] < 4.6);
}

TEST_CASE("energy gradient and hessian match finite differences") {
  const WarpedProduct g = warped();
  const PolarMesh m = PolarMesh::make(1.5, 8, 12);
  const CmcDiscretization d = CmcDiscretization::build(g, m);
  const int nn = m.num_nodes();
  const double h = -0.35;

  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> un(-0.05, 0.05);
  std::vector<double> u = sample(m, smooth_test_field);
  for (double& x : u) x += un(rng);

  std::vector<double> v(nn, 0.0), w(nn, 0.0);
  for (int k = 0; k < nn; ++k)
    if (!m.boundary(k)) {
      v[k] = un(rng);
      w[k] = un(rng);
    }

  const CmcEval e0 = cmc_eval(d, u, h);

  const double eps = 1e-5;
  std::vector<double> up = u, um = u;
  for (int k = 0; k < nn; ++k) {
    up[k] += eps * v[k];
    um[k] -= eps * v[k];
  }
  const CmcEval ep = cmc_eval(d, up, h);
  const CmcEval em = cmc_eval(d, um, h);

  double gdotv = 0.0;
  for (int k = 0; k < nn; ++k) gdotv += e0.grad[k] * v[k];
  const double fd = (ep.energy - em.energy) / (2.0 * eps);
  CHECK(gdotv == doctest::Approx(fd).epsilon(1e-6));

  std::vector<double> hv;
  hessian_apply(d, e0.state, v, hv);
  double worst = 0.0, scale = 0.0;
  for (int k = 0; k < nn; ++k) {
    if (m.boundary(k)) continue;
    const double fdk = (ep.grad[k] - em.grad[k]) / (2.0 * eps);
    worst = std::max(worst, std::abs(hv[k] - fdk));
    scale = std::max(scale, std::abs(hv[k]));
  }
  CHECK(worst < 1e-8 + 1e-5 * scale);

  std::vector<double> hw;
  hessian_apply(d, e0.state, w, hw);
  double hvw = 0.0, vhw = 0.0, hvv = 0.0;
  for (int k = 0; k < nn; ++k) {
    hvw += hv[k] * w[k];
    vhw += v[k] * hw[k];
    hvv += hv[k] * v[k];
  }
  CHECK(hvw == doctest::Approx(vhw).epsilon(1e-12));
  CHECK(hvv > 0.0);

  const std::vector<double> diag = hessian_diag(d, e0.state);
  std::vector<double> ek(nn, 0.0), hek;
  for (int k = 0; k < nn; ++k) {
    if (m.boundary(k)) {
      CHECK(diag[k] == 1.0);
      continue;
    }
    ek.assign(nn, 0.0);
    ek[k] = 1.0;
    hessian_apply(d, e0.state, ek, hek);
    CHECK(diag[k] == doctest::Approx(hek[k]).epsilon(1e-13));
  }
}

TEST_CASE("constant fields are exact critical points at h = 0") {
  const WarpedProduct g = warped();
  const PolarMesh m = PolarMesh::make(1.5, 32, 16);
  const CmcDiscretization d = CmcDiscretization::build(g, m);
  const std::vector<double> u(m.num_nodes(), 2.3);

  const CmcEval e = cmc_eval(d, u, 0.0);
  CHECK(e.residual_inf == 0.0);
  for (int k = 0; k < m.num_nodes(); ++k) CHECK(e.grad[k] == 0.0);

  // with h != 0 the scaled residual of a constant approaches -n h
  const PolarMesh mf = PolarMesh::make(1.5, 64, 32);
  const CmcDiscretization df = CmcDiscretization::build(g, mf);
  const std::vector<double> uf(mf.num_nodes(), 2.3);
  const std::vector<double> res = cmc_residual(df, uf, 0.3);
  for (int k = 0; k < mf.num_nodes(); ++k) {
    if (mf.boundary(k)) continue;
    CHECK(res[k] == doctest::Approx(-0.6).epsilon(mf.r(k) >= 0.375 ? 2e-3 : 2e-2));
  }
}

TEST_CASE("conservative and direct residuals agree at second order") {
  // pointwise agreement is second order away from the pole; the rings next to
  // it keep a first-order truncation (flux errors divided by the collapsing
  // volume weight), so the core and full norms are tracked separately
  const WarpedProduct g = warped();
  const double h = 0.2;
  double core[2], full[2];
  const int nside[2] = {32, 64};
  for (int t = 0; t < 2; ++t) {
    const PolarMesh m = PolarMesh::make(1.5, nside[t], nside[t]);
    const CmcDiscretization d = CmcDiscretization::build(g, m);
    GraphFunction u{m, sample(m, smooth_test_field)};
    const std::vector<double> rc = cmc_residual(d, u.values, h);
    const std::vector<double> rd = cmc_residual_direct(g, u, h);
    core[t] = full[t] = 0.0;
    for (int k = 1; k < m.num_nodes(); ++k) {
      if (m.boundary(k)) continue;
      const double gap = std::abs(rc[k] - rd[k]);
      full[t] = std::max(full[t], gap);
      if (m.r(k) >= 0.375) core[t] = std::max(core[t], gap);
    }
  }
  CAPTURE(core[0]);
  CAPTURE(core[1]);
  CAPTURE(full[0]);
  CAPTURE(full[1]);
  CHECK(core[1] < 0.03);
  CHECK(core[0] / core[1] > 3.0);
  CHECK(core[0] / core[1] < 5.5);
  // the ring next to the pole keeps an O(1) nodal-scaling mismatch on generic
  // fields; it must not grow under refinement
  CHECK(full[1] < full[0]);
}

TEST_CASE("pole gradient recovery is second order") {
  const WarpedProduct g = flat_unit();
  const PolarMesh m = PolarMesh::make(1.0, 16, 32);
  auto f = [](double r, double th) {
    const double c = std::cos(th), s = std::sin(th);
    return r * (2.0 * c + 0.5 * s) + 0.7 * r * r * (1.0 + std::cos(2.0 * th)) +
           r * r * r * c * c * c;
  };
  const NodeGradients ng = node_gradients(g, {m, sample(m, f)});
  const double dr = m.dr();
  // cos^3 feeds 3/4 of its cubic coefficient into mode one
  CHECK(ng.radial[0] == doctest::Approx(2.0 + 0.75 * dr * dr).epsilon(1e-8));
  CHECK(ng.angular[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(ng.norm[0] == doctest::Approx(std::hypot(ng.radial[0], 0.5)).epsilon(1e-13));

  // gauss fields expose the same norm through W at the pole
  const GaussFields gf = gauss_fields(g, {m, sample(m, f)});
  CHECK(gf.w[0] ==
        doctest::Approx(std::sqrt(1.0 + ng.norm[0] * ng.norm[0])).epsilon(1e-13));
  CHECK(std::abs(gf.unit_defect[0]) < 1e-14);
}

TEST_CASE("grid sampled geometry reproduces the radial discretization") {
  const int nr = 24, nt = 16;
  const double R = 1.5;
  const WarpedProduct gr = warped();
  const WarpedProduct gg = WarpedProduct::make_grid2d(
      make_hyperbolic_fm(1.0), make_exp_decay_rho(1.0, PsiKind::kLog1p), R, nr, nt);

  const PolarMesh m = PolarMesh::make(R, nr, nt);
  const CmcDiscretization dr_ = CmcDiscretization::build(gr, m);
  const CmcDiscretization dg = CmcDiscretization::build(gg, m);

  const std::vector<double> u = sample(m, smooth_test_field);
  const std::vector<double> ra = cmc_residual(dr_, u, 0.1);
  const std::vector<double> rb = cmc_residual(dg, u, 0.1);
  double worst = 0.0, worst_core = 0.0;
  for (int k = 0; k < m.num_nodes(); ++k) {
    worst = std::max(worst, std::abs(ra[k] - rb[k]));
    if (m.r(k) >= 0.375) worst_core = std::max(worst_core, std::abs(ra[k] - rb[k]));
  }
  CAPTURE(worst);
  CHECK(worst < 2e-2);
  CHECK(worst_core < 2e-3);

  CHECK_THROWS_AS(CmcDiscretization::build(gg, PolarMesh::make(R, 32, nt)),
                  DiscretizationError);
  CHECK_THROWS_AS(CmcDiscretization::build(gg, PolarMesh::make(1.4, nr, nt)),
                  DiscretizationError);
  CHECK_THROWS_AS(
      CmcDiscretization::build(
          WarpedProduct::make_radial(3, make_hyperbolic_fm(1.0), make_constant_rho(1.0)),
          m),
      DiscretizationError);
}

TEST_CASE("ring flux matches the radial flux of a radial graph") {
  const WarpedProduct g = flat_unit();
  const PolarMesh m = PolarMesh::make(2.0, 64, 32);
  const CmcDiscretization d = CmcDiscretization::build(g, m);
  auto f = [](double r, double) { return 0.2 * r * r; };
  std::vector<double> u = sample(m, f);

  std::vector<double> shifted = u;
  for (double& x : shifted) x += 5.0;
  for (int cut : {8, 24, 48}) {
    CHECK(ring_flux(d, u, cut) ==
          doctest::Approx(ring_flux(d, shifted, cut)).epsilon(1e-13));
    const double rm = (cut - 0.5) * m.dr();
    const double ur = 0.4 * rm;
    const double flux = 2.0 * M_PI * rm * ur / std::sqrt(1.0 + ur * ur);
    CHECK(ring_flux(d, u, cut) == doctest::Approx(flux).epsilon(5e-3));
    const double vol = M_PI * rm * rm;
    CHECK(ring_volume(d, cut) == doctest::Approx(vol).epsilon(5e-3));
  }
  CHECK_THROWS_AS(ring_flux(d, u, 0), DiscretizationError);
  CHECK_THROWS_AS(ring_volume(d, 65), DiscretizationError);
}

TEST_CASE("weighted laplacian check on exactly minimal graphs") {
  // affine graphs over the flat unweighted disk are minimal; with h = 0 the
  // right side vanishes and the defect equals the assembled operator
  const WarpedProduct g = flat_unit();
  auto affine = [](double r, double th) { return 0.1 + 0.4 * r * std::cos(th); };

  double core[2], full[2];
  const int nside[2] = {24, 48};
  for (int t = 0; t < 2; ++t) {
    const PolarMesh m = PolarMesh::make(1.5, nside[t], nside[t]);
    const LaplacianCheck lc = intrinsic_laplacian_check(g, {m, sample(m, affine)}, 0.0);
    for (int k = 0; k < m.num_nodes(); ++k) {
      CHECK(lc.rhs[k] == 0.0);
      CHECK(lc.defect[k] == lc.lu[k]);
    }
    core[t] = lc.defect_inf_core;
    full[t] = lc.defect_inf;
  }
  CAPTURE(core[0]);
  CAPTURE(core[1]);
  CHECK(core[1] < 8e-3);
  CHECK(core[0] / core[1] > 3.0);
  CHECK(core[0] / core[1] < 5.5);
  CHECK(full[1] < 0.6 * full[0]);

  // constants are minimal in any warped product; only rounding in the rim
  // gradient stencil survives
  const WarpedProduct gw = warped();
  const PolarMesh m = PolarMesh::make(1.5, 16, 16);
  const LaplacianCheck lc =
      intrinsic_laplacian_check(gw, {m, std::vector<double>(m.num_nodes(), 1.7)}, 0.0);
  CHECK(lc.defect_inf < 1e-12);
}

TEST_CASE("evaluation is deterministic") {
  const WarpedProduct g = warped();
  const PolarMesh m = PolarMesh::make(1.5, 24, 16);
  const CmcDiscretization d1 = CmcDiscretization::build(g, m);
  const CmcDiscretization d2 = CmcDiscretization::build(g, m);
  const std::vector<double> u = sample(m, smooth_test_field);

  const CmcEval a = cmc_eval(d1, u, 0.25);
  const CmcEval b = cmc_eval(d2, u, 0.25);
  CHECK(std::memcmp(&a.energy, &b.energy, sizeof(double)) == 0);
  CHECK(a.grad == b.grad);
  CHECK(a.residual == b.residual);
}
