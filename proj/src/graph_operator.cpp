#include "kgl/graph_operator.hpp"

#include <algorithm>
#include <cmath>

#include "kgl/errors.hpp"

namespace kgl {

namespace {

constexpr double kG = 0.57735026918962576451;  // 2-point Gauss abscissa

struct QRef {
  double xi, eta;
};
constexpr QRef kQ[4] = {{-kG, -kG}, {kG, -kG}, {-kG, kG}, {kG, kG}};

// corner order: (i,j), (i+1,j), (i,j+1), (i+1,j+1)
double shape_ref(int c, double xi, double eta) {
  const double sx = (c == 1 || c == 3) ? 1.0 + xi : 1.0 - xi;
  const double se = (c == 2 || c == 3) ? 1.0 + eta : 1.0 - eta;
  return 0.25 * sx * se;
}
double dshape_dxi_ref(int c, double eta) {
  const double se = (c == 2 || c == 3) ? 1.0 + eta : 1.0 - eta;
  return (c == 1 || c == 3) ? 0.25 * se : -0.25 * se;
}
double dshape_deta_ref(int c, double xi) {
  const double sx = (c == 1 || c == 3) ? 1.0 + xi : 1.0 - xi;
  return (c == 2 || c == 3) ? 0.25 * sx : -0.25 * sx;
}

void check_field(const CmcDiscretization& d, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != d.num_nodes())
    throw DiscretizationError("nodal field size does not match the mesh");
}

}  // namespace

NodeGradients node_gradients(const WarpedProduct& g, const GraphFunction& u) {
  const PolarMesh& m = u.mesh;
  const int nn = m.num_nodes();
  if (static_cast<int>(u.values.size()) != nn)
    throw DiscretizationError("nodal field size does not match the mesh");
  const double dr = m.dr(), dt = m.dtheta();
  const std::vector<double>& v = u.values;

  NodeGradients out;
  out.radial.assign(nn, 0.0);
  out.angular.assign(nn, 0.0);
  out.norm.assign(nn, 0.0);

  for (int i = 1; i <= m.nr; ++i) {
    for (int j = 0; j < m.ntheta; ++j) {
      const int k = m.node(i, j);
      double ur;
      if (i < m.nr) {
        ur = (v[m.node(i + 1, j)] - v[m.node(i - 1, j)]) / (2.0 * dr);
      } else {
        // one-sided second order with the same h^2 u'''/6 error term as the
        // centered stencil, so divergences of the cached gradient stay second
        // order at the last interior ring
        ur = (4.0 * v[k] - 7.0 * v[m.node(i - 1, j)] + 4.0 * v[m.node(i - 2, j)] -
              v[m.node(i - 3, j)]) /
             (2.0 * dr);
      }
      const double ut = (v[m.node(i, j + 1)] - v[m.node(i, j - 1)]) / (2.0 * dt);
      const double fm = g.fm({i * dr, j * dt});
      out.radial[k] = ur;
      out.angular[k] = ut / fm;
      out.norm[k] = std::hypot(ur, ut / fm);
    }
  }

  // pole: mode-1 Fourier fit on ring 1 recovers the Cartesian gradient
  double a1 = 0.0, b1 = 0.0;
  for (int j = 0; j < m.ntheta; ++j) {
    const double du = v[m.node(1, j)] - v[0];
    a1 += du * std::cos(j * dt);
    b1 += du * std::sin(j * dt);
  }
  const double gx = 2.0 * a1 / (m.ntheta * dr);
  const double gy = 2.0 * b1 / (m.ntheta * dr);
  out.radial[0] = gx;
  out.angular[0] = gy;
  out.norm[0] = std::hypot(gx, gy);
  return out;
}

GaussPoint gauss_point(double gamma, double grad_sq) {
  GaussPoint p;
  p.w = std::sqrt(gamma + grad_sq);
  p.inv_w = 1.0 / p.w;
  p.y_tan_sq = gamma * grad_sq * p.inv_w * p.inv_w;
  p.unit_defect = (gamma + grad_sq) * p.inv_w * p.inv_w - 1.0;
  return p;
}

GaussFields gauss_fields(const WarpedProduct& g, const GraphFunction& u) {
  const NodeGradients ng = node_gradients(g, u);
  const PolarMesh& m = u.mesh;
  const int nn = m.num_nodes();
  GaussFields f;
  f.w.resize(nn);
  f.inv_w.resize(nn);
  f.y_tan_sq.resize(nn);
  f.unit_defect.resize(nn);
  for (int k = 0; k < nn; ++k) {
    const double gamma = g.gamma({m.r(k), m.theta(k)});
    const GaussPoint p = gauss_point(gamma, ng.norm[k] * ng.norm[k]);
    f.w[k] = p.w;
    f.inv_w[k] = p.inv_w;
    f.y_tan_sq[k] = p.y_tan_sq;
    f.unit_defect[k] = p.unit_defect;
  }
  return f;
}

Metric2 induced_metric_contravariant(const Metric2& s, double u1, double u2,
                                     double gamma) {
  const double det = s.a11 * s.a22 - s.a12 * s.a12;
  if (!(det > 0.0) || !(s.a11 > 0.0))
    throw DomainError("base metric must be positive definite");
  const double i11 = s.a22 / det, i12 = -s.a12 / det, i22 = s.a11 / det;
  const double up1 = i11 * u1 + i12 * u2;
  const double up2 = i12 * u1 + i22 * u2;
  const double w2 = gamma + up1 * u1 + up2 * u2;
  Metric2 g;
  g.a11 = i11 - up1 * up1 / w2;
  g.a12 = i12 - up1 * up2 / w2;
  g.a22 = i22 - up2 * up2 / w2;
  return g;
}

EigenPair induced_metric_relative_eigenvalues(const Metric2& s, double u1, double u2,
                                              double gamma) {
  const Metric2 g = induced_metric_contravariant(s, u1, u2, gamma);
  // eigenvalues of sigma_cov * g^{..}; similar to a symmetric matrix
  const double tr = s.a11 * g.a11 + 2.0 * s.a12 * g.a12 + s.a22 * g.a22;
  const double det =
      (s.a11 * s.a22 - s.a12 * s.a12) * (g.a11 * g.a22 - g.a12 * g.a12);
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return {0.5 * (tr - disc), 0.5 * (tr + disc)};
}

CmcDiscretization CmcDiscretization::build(const WarpedProduct& g,
                                           const PolarMesh& mesh) {
  if (g.dim() != 2)
    throw DiscretizationError("2d mesh discretization needs dim_m = 2");
  CmcDiscretization d;
  d.mesh_ = mesh;
  const int nr = mesh.nr, nt = mesh.ntheta;
  const double dr = mesh.dr(), dt = mesh.dtheta();

  for (int q = 0; q < 4; ++q) {
    for (int c = 0; c < 4; ++c) {
      d.shape_[q * 4 + c] = shape_ref(c, kQ[q].xi, kQ[q].eta);
      d.dxi_[q * 4 + c] = dshape_dxi_ref(c, kQ[q].eta);
      d.deta_[q * 4 + c] = dshape_deta_ref(c, kQ[q].xi);
    }
  }

  // node samples of fm and rho feeding the bilinear quadrature interpolation
  const int nn = mesh.num_nodes();
  std::vector<double> fm_n(nn), rho_n(nn);
  if (g.is_grid()) {
    const PolarGridData& gd = g.grid();
    if (gd.nr != nr || gd.ntheta != nt ||
        std::abs(gd.radius - mesh.radius) > 1e-12 * std::max(1.0, mesh.radius))
      throw DiscretizationError(
          "grid-mode geometry must be sampled on the solver mesh");
    for (int i = 0; i <= nr; ++i)
      for (int j = 0; j < nt; ++j) {
        fm_n[mesh.node(i, j)] = gd.fm[i * nt + j];
        rho_n[mesh.node(i, j)] = gd.rho[i * nt + j];
      }
  } else {
    for (int i = 0; i <= nr; ++i)
      for (int j = 0; j < nt; ++j) {
        const Point x{i * dr, j * dt};
        fm_n[mesh.node(i, j)] = g.fm(x);
        rho_n[mesh.node(i, j)] = g.rho(x);
      }
  }

  const int nc = nr * nt;
  d.corners_.resize(nc * 4);
  d.jac_rho_.resize(nc * 4);
  d.jac_.resize(nc * 4);
  d.gamma_q_.resize(nc * 4);
  d.inv_fm_q_.resize(nc * 4);
  d.node_volume_.assign(nn, 0.0);
  d.node_rho_ = rho_n;

  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int cell = i * nt + j;
      const int cn[4] = {mesh.node(i, j), mesh.node(i + 1, j), mesh.node(i, j + 1),
                         mesh.node(i + 1, j + 1)};
      for (int c = 0; c < 4; ++c) d.corners_[cell * 4 + c] = cn[c];
      for (int q = 0; q < 4; ++q) {
        double fmq, rhoq;
        if (g.is_grid()) {
          fmq = rhoq = 0.0;
          for (int c = 0; c < 4; ++c) {
            fmq += d.shape_[q * 4 + c] * fm_n[cn[c]];
            rhoq += d.shape_[q * 4 + c] * rho_n[cn[c]];
          }
        } else {
          const double rq = (i + 0.5 * (1.0 + kQ[q].xi)) * dr;
          const double tq = (j + 0.5 * (1.0 + kQ[q].eta)) * dt;
          fmq = g.fm({rq, tq});
          rhoq = g.rho({rq, tq});
        }
        if (!(fmq > 0.0) || !(rhoq > 0.0))
          throw DiscretizationError("nonpositive fm or rho at a quadrature point");
        const int idx = cell * 4 + q;
        d.jac_[idx] = fmq * dr * dt * 0.25;
        d.jac_rho_[idx] = d.jac_[idx] * rhoq;
        d.gamma_q_[idx] = 1.0 / (rhoq * rhoq);
        d.inv_fm_q_[idx] = 1.0 / fmq;
        for (int c = 0; c < 4; ++c)
          d.node_volume_[cn[c]] += d.jac_[idx] * d.shape_[q * 4 + c];
      }
    }
  }
  return d;
}

CmcEval cmc_eval(const CmcDiscretization& d, const std::vector<double>& u, double h) {
  check_field(d, u);
  const PolarMesh& m = d.mesh();
  const int nc = d.num_cells(), nn = d.num_nodes();
  const double ar = 2.0 / m.dr(), at = 2.0 / m.dtheta();
  const double nh = 2.0 * h;  // build() pins dim_m = 2

  CmcEval e;
  e.grad.assign(nn, 0.0);
  e.state.w.resize(nc * 4);
  e.state.g1.resize(nc * 4);
  e.state.g2.resize(nc * 4);

  const std::vector<int>& cn = d.corners();
  const std::vector<double>& jr = d.jac_rho();
  const std::vector<double>& gq = d.gamma_q();
  const std::vector<double>& ifm = d.inv_fm_q();

  double area = 0.0, vol = 0.0;
  for (int cell = 0; cell < nc; ++cell) {
    const int* c = &cn[cell * 4];
    const double uc[4] = {u[c[0]], u[c[1]], u[c[2]], u[c[3]]};
    for (int q = 0; q < 4; ++q) {
      const int idx = cell * 4 + q;
      double dxi = 0.0, deta = 0.0, uq = 0.0;
      for (int k = 0; k < 4; ++k) {
        dxi += d.dshape_dxi(q, k) * uc[k];
        deta += d.dshape_deta(q, k) * uc[k];
        uq += d.shape(q, k) * uc[k];
      }
      const double g1 = dxi * ar;
      const double g2 = deta * at * ifm[idx];
      const double w = std::sqrt(gq[idx] + g1 * g1 + g2 * g2);
      e.state.w[idx] = w;
      e.state.g1[idx] = g1;
      e.state.g2[idx] = g2;
      area += jr[idx] * w;
      vol += jr[idx] * uq;
      const double s1 = jr[idx] * g1 / w, s2 = jr[idx] * g2 / w;
      const double sm = jr[idx] * nh;
      for (int k = 0; k < 4; ++k)
        e.grad[c[k]] += s1 * d.dshape_dxi(q, k) * ar +
                        s2 * d.dshape_deta(q, k) * at * ifm[idx] +
                        sm * d.shape(q, k);
    }
  }
  e.area = area;
  e.energy = area + nh * vol;

  e.residual.assign(nn, 0.0);
  const std::vector<double>& nv = d.node_volume();
  const std::vector<double>& nrho = d.node_rho();
  double rinf = 0.0;
  for (int k = 0; k < nn; ++k) {
    if (m.boundary(k)) {
      e.grad[k] = 0.0;
      continue;
    }
    e.residual[k] = -e.grad[k] / (nv[k] * nrho[k]);
    rinf = std::max(rinf, std::abs(e.residual[k]));
  }
  e.residual_inf = rinf;
  return e;
}

std::vector<double> cmc_residual(const CmcDiscretization& d,
                                 const std::vector<double>& u, double h) {
  return cmc_eval(d, u, h).residual;
}

std::vector<double> cmc_residual_direct(const WarpedProduct& g,
                                        const GraphFunction& u, double h) {
  const PolarMesh& m = u.mesh;
  const int nn = m.num_nodes();
  const NodeGradients ng = node_gradients(g, u);
  const double dr = m.dr(), dt = m.dtheta();
  const double nh = g.dim() * h;

  // orthonormal flux components of grad u / W; the pole carries zero radial
  // flux weight (fm = 0)
  std::vector<double> A(nn, 0.0), B(nn, 0.0), W(nn, 0.0);
  for (int i = 1; i <= m.nr; ++i)
    for (int j = 0; j < m.ntheta; ++j) {
      const int k = m.node(i, j);
      const Point x{i * dr, j * dt};
      const double w = std::sqrt(g.gamma(x) + ng.norm[k] * ng.norm[k]);
      W[k] = w;
      A[k] = g.fm(x) * ng.radial[k] / w;
      B[k] = ng.angular[k] / w;
    }

  std::vector<double> res(nn, 0.0);
  for (int i = 1; i < m.nr; ++i)
    for (int j = 0; j < m.ntheta; ++j) {
      const int k = m.node(i, j);
      const double dA = (A[m.node(i + 1, j)] - A[m.node(i - 1, j)]) / (2.0 * dr);
      const double dB = (B[m.node(i, j + 1)] - B[m.node(i, j - 1)]) / (2.0 * dt);
      const Point x{i * dr, j * dt};
      const double fm = g.fm(x);
      double gr, gt;
      g.grad_gamma(x, &gr, &gt);
      const double adv = (gr * ng.radial[k] + gt * ng.angular[k]) /
                         (2.0 * g.gamma(x) * W[k]);
      res[k] = (dA + dB) / fm - adv - nh;
    }
  return res;
}

void hessian_apply(const CmcDiscretization& d, const OperatorState& s,
                   const std::vector<double>& v, std::vector<double>& out) {
  check_field(d, v);
  const PolarMesh& m = d.mesh();
  const int nc = d.num_cells(), nn = d.num_nodes();
  const double ar = 2.0 / m.dr(), at = 2.0 / m.dtheta();
  out.assign(nn, 0.0);

  const std::vector<int>& cn = d.corners();
  const std::vector<double>& jr = d.jac_rho();
  const std::vector<double>& ifm = d.inv_fm_q();

  for (int cell = 0; cell < nc; ++cell) {
    const int* c = &cn[cell * 4];
    double vc[4];
    for (int k = 0; k < 4; ++k) vc[k] = m.boundary(c[k]) ? 0.0 : v[c[k]];
    for (int q = 0; q < 4; ++q) {
      const int idx = cell * 4 + q;
      double dxi = 0.0, deta = 0.0;
      for (int k = 0; k < 4; ++k) {
        dxi += d.dshape_dxi(q, k) * vc[k];
        deta += d.dshape_deta(q, k) * vc[k];
      }
      const double gv1 = dxi * ar;
      const double gv2 = deta * at * ifm[idx];
      const double w = s.w[idx], g1 = s.g1[idx], g2 = s.g2[idx];
      const double dot = (g1 * gv1 + g2 * gv2) / (w * w);
      const double h1 = jr[idx] * (gv1 - g1 * dot) / w;
      const double h2 = jr[idx] * (gv2 - g2 * dot) / w;
      for (int k = 0; k < 4; ++k)
        out[c[k]] += h1 * d.dshape_dxi(q, k) * ar +
                     h2 * d.dshape_deta(q, k) * at * ifm[idx];
    }
  }
  for (int k = 0; k < nn; ++k)
    if (m.boundary(k)) out[k] = 0.0;
}

std::vector<double> hessian_diag(const CmcDiscretization& d, const OperatorState& s) {
  const PolarMesh& m = d.mesh();
  const int nc = d.num_cells(), nn = d.num_nodes();
  const double ar = 2.0 / m.dr(), at = 2.0 / m.dtheta();
  std::vector<double> diag(nn, 0.0);

  const std::vector<int>& cn = d.corners();
  const std::vector<double>& jr = d.jac_rho();
  const std::vector<double>& ifm = d.inv_fm_q();

  for (int cell = 0; cell < nc; ++cell) {
    const int* c = &cn[cell * 4];
    for (int q = 0; q < 4; ++q) {
      const int idx = cell * 4 + q;
      const double w = s.w[idx], g1 = s.g1[idx], g2 = s.g2[idx];
      // pole cells carry the pole node on two corners; their shape-derivative
      // coefficients combine before squaring
      for (int k = 0; k < 4; ++k) {
        bool seen = false;
        for (int p = 0; p < k; ++p) seen = seen || c[p] == c[k];
        if (seen) continue;
        double a = 0.0, b = 0.0;
        for (int p = k; p < 4; ++p) {
          if (c[p] != c[k]) continue;
          a += d.dshape_dxi(q, p) * ar;
          b += d.dshape_deta(q, p) * at * ifm[idx];
        }
        const double gd = (a * g1 + b * g2) / w;
        diag[c[k]] += jr[idx] * ((a * a + b * b) - gd * gd) / w;
      }
    }
  }
  for (int k = 0; k < nn; ++k)
    if (m.boundary(k)) diag[k] = 1.0;
  return diag;
}

double weighted_volume(const CmcDiscretization& d, const std::vector<double>& w_nodes) {
  check_field(d, w_nodes);
  const int nc = d.num_cells();
  const std::vector<int>& cn = d.corners();
  const std::vector<double>& jr = d.jac_rho();
  double acc = 0.0;
  for (int cell = 0; cell < nc; ++cell) {
    const int* c = &cn[cell * 4];
    for (int q = 0; q < 4; ++q) {
      double wq = 0.0;
      for (int k = 0; k < 4; ++k) wq += d.shape(q, k) * w_nodes[c[k]];
      acc += jr[cell * 4 + q] * wq;
    }
  }
  return acc;
}

double graph_area(const CmcDiscretization& d, const std::vector<double>& u) {
  return cmc_eval(d, u, 0.0).area;
}

double ring_flux(const CmcDiscretization& d, const std::vector<double>& u, int cut) {
  check_field(d, u);
  const PolarMesh& m = d.mesh();
  if (cut < 1 || cut > m.nr) throw DiscretizationError("flux cut out of range");
  const CmcEval e = cmc_eval(d, u, 0.0);  // grad holds the area part only
  // boundary rows were masked; cut <= nr never reaches them
  double acc = 0.0;
  for (int k = 0; k < d.num_nodes(); ++k)
    if (m.ring(k) < cut) acc += e.grad[k];
  return -acc;
}

double ring_volume(const CmcDiscretization& d, int cut) {
  const PolarMesh& m = d.mesh();
  if (cut < 1 || cut > m.nr) throw DiscretizationError("flux cut out of range");
  const std::vector<int>& cn = d.corners();
  const std::vector<double>& jr = d.jac_rho();
  double acc = 0.0;
  for (int cell = 0; cell < d.num_cells(); ++cell) {
    const int* c = &cn[cell * 4];
    for (int q = 0; q < 4; ++q)
      for (int k = 0; k < 4; ++k)
        if (m.ring(c[k]) < cut) acc += jr[cell * 4 + q] * d.shape(q, k);
  }
  return acc;
}

LaplacianCheck intrinsic_laplacian_check(const WarpedProduct& g,
                                         const GraphFunction& u, double h) {
  const PolarMesh& m = u.mesh;
  const int nn = m.num_nodes();
  const NodeGradients ng = node_gradients(g, u);
  const double dr = m.dr(), dt = m.dtheta();
  const double n = g.dim();

  // F = rho^3 W fm g^{ij} u_j collapses to (rho fm u_r / W, rho u_theta / W)
  // in orthonormal components; radial flux vanishes at the pole with fm
  std::vector<double> F1(nn, 0.0), F2(nn, 0.0), W(nn, 0.0), rho(nn, 0.0);
  for (int i = 1; i <= m.nr; ++i)
    for (int j = 0; j < m.ntheta; ++j) {
      const int k = m.node(i, j);
      const Point x{i * dr, j * dt};
      const double w = std::sqrt(g.gamma(x) + ng.norm[k] * ng.norm[k]);
      W[k] = w;
      rho[k] = g.rho(x);
      F1[k] = rho[k] * g.fm(x) * ng.radial[k] / w;
      F2[k] = rho[k] * ng.angular[k] / w;
    }

  LaplacianCheck out;
  out.lu.assign(nn, 0.0);
  out.rhs.assign(nn, 0.0);
  out.defect.assign(nn, 0.0);
  for (int i = 1; i < m.nr; ++i)
    for (int j = 0; j < m.ntheta; ++j) {
      const int k = m.node(i, j);
      const Point x{i * dr, j * dt};
      const double dF1 = (F1[m.node(i + 1, j)] - F1[m.node(i - 1, j)]) / (2.0 * dr);
      const double dF2 = (F2[m.node(i, j + 1)] - F2[m.node(i, j - 1)]) / (2.0 * dt);
      const double gamma = g.gamma(x);
      const double weight = rho[k] * rho[k] * rho[k] * W[k] * g.fm(x);
      out.lu[k] = (dF1 + dF2) / weight;
      out.rhs[k] = n * gamma * h / W[k];
      out.defect[k] = out.lu[k] - out.rhs[k];
      out.defect_inf = std::max(out.defect_inf, std::abs(out.defect[k]));
      if (i * dr >= 0.25 * m.radius)
        out.defect_inf_core = std::max(out.defect_inf_core, std::abs(out.defect[k]));
    }
  return out;
}

}  // namespace kgl
