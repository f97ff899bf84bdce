#pragma once

#include <vector>

#include "kgl/geometry.hpp"
#include "kgl/mesh.hpp"

namespace kgl {

// Nodal scalar field over a PolarMesh, row-major rings.
struct GraphFunction {
  PolarMesh mesh;
  std::vector<double> values;  // size mesh.num_nodes()
};

// First derivatives per node in the orthonormal frame (e_r, e_theta/fm).
// At the pole the pair (radial, angular) holds the Cartesian components of
// the gradient recovered from the mode-1 Fourier fit on ring 1; norm is
// frame-independent everywhere.
struct NodeGradients {
  std::vector<double> radial;
  std::vector<double> angular;
  std::vector<double> norm;
};

NodeGradients node_gradients(const WarpedProduct& g, const GraphFunction& u);

// Pointwise Gauss-map quantities of the graph at a point with vertical
// energy gamma and tangential gradient norm squared grad_sq.
struct GaussPoint {
  double w;           // sqrt(gamma + grad_sq)
  double inv_w;       // height function <Y, N> of the unit normal
  double y_tan_sq;    // |gamma Y^T|^2 = gamma * grad_sq / w^2
  double unit_defect; // gamma/w^2 + grad_sq/w^2 - 1
};
GaussPoint gauss_point(double gamma, double grad_sq);

// Per-node Gauss-map fields.
struct GaussFields {
  std::vector<double> w;
  std::vector<double> inv_w;
  std::vector<double> y_tan_sq;
  std::vector<double> unit_defect;
};
GaussFields gauss_fields(const WarpedProduct& g, const GraphFunction& u);

// 2x2 symmetric tensor in chart coordinates.
struct Metric2 {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;
};

// Contravariant induced metric g^{ij} = sigma^{ij} - u^i u^j / W^2 of the
// graph over a base metric sigma (covariant components) with covariant
// gradient (u1, u2) and vertical energy gamma.
Metric2 induced_metric_contravariant(const Metric2& sigma_cov, double u1, double u2,
                                     double gamma);

// Eigenvalues of the induced contravariant metric relative to sigma^{ij},
// ascending. Exact values are gamma/W^2 along the gradient and 1 across it.
struct EigenPair {
  double lo, hi;
};
EigenPair induced_metric_relative_eigenvalues(const Metric2& sigma_cov, double u1,
                                              double u2, double gamma);

// Precomputed cell quadrature for the graph energy on a polar mesh:
// 2x2 Gauss points per cell, rho and fm interpolated bilinearly from node
// samples. Grid-mode geometries must match the mesh exactly.
class CmcDiscretization {
 public:
  static CmcDiscretization build(const WarpedProduct& g, const PolarMesh& mesh);

  const PolarMesh& mesh() const { return mesh_; }
  int num_nodes() const { return mesh_.num_nodes(); }
  int num_cells() const { return mesh_.nr * mesh_.ntheta; }

  const std::vector<double>& node_volume() const { return node_volume_; }
  const std::vector<double>& node_rho() const { return node_rho_; }

  // Per cell (4 corner node ids) and per quadrature point (4 per cell) data,
  // cell-major: index cell*4 + q.
  const std::vector<int>& corners() const { return corners_; }
  const std::vector<double>& jac_rho() const { return jac_rho_; }   // fm*rho*dr*dth/4
  const std::vector<double>& jac() const { return jac_; }           // fm*dr*dth/4
  const std::vector<double>& gamma_q() const { return gamma_q_; }
  const std::vector<double>& inv_fm_q() const { return inv_fm_q_; }

  // Shape values and reference derivatives at quadrature point q, corner c.
  double shape(int q, int c) const { return shape_[q * 4 + c]; }
  double dshape_dxi(int q, int c) const { return dxi_[q * 4 + c]; }
  double dshape_deta(int q, int c) const { return deta_[q * 4 + c]; }

 private:
  PolarMesh mesh_;
  std::vector<int> corners_;
  std::vector<double> jac_rho_, jac_, gamma_q_, inv_fm_q_;
  std::vector<double> node_volume_, node_rho_;
  double shape_[16], dxi_[16], deta_[16];
};

// Gradient state at quadrature points for a fixed nodal field; reused by the
// Hessian action during one Newton step.
struct OperatorState {
  std::vector<double> w;   // per qpoint
  std::vector<double> g1;  // radial gradient component
  std::vector<double> g2;  // angular gradient component (orthonormal)
};

struct CmcEval {
  double energy = 0.0;                // area + n*H * weighted volume
  double area = 0.0;                  // integral of rho * W over the ball
  std::vector<double> grad;           // dE/du_k, boundary entries zeroed
  std::vector<double> residual;       // (div(rho grad u / W)/rho - nH) per node
  double residual_inf = 0.0;          // max |residual| over interior nodes
  OperatorState state;
};

// Energy, gradient and scaled residual of the nodal field u at mean
// curvature h. Boundary rows are masked.
CmcEval cmc_eval(const CmcDiscretization& d, const std::vector<double>& u, double h);

// Scaled conservative-form residual only (gradient of the energy divided by
// node volume and rho, sign-flipped to the div - nH convention).
std::vector<double> cmc_residual(const CmcDiscretization& d, const std::vector<double>& u,
                                 double h);

// Node-centered finite-difference residual of the unweighted equation
// div(grad u / W) - <grad gamma, grad u>/(2 gamma W) - nH. Pole and boundary
// entries are zero; rings 1..nr-1 are populated.
std::vector<double> cmc_residual_direct(const WarpedProduct& g, const GraphFunction& u,
                                        double h);

// Action v -> H(u) v of the energy Hessian at the state produced by cmc_eval.
// Boundary entries of v are treated as zero and boundary rows are zeroed.
void hessian_apply(const CmcDiscretization& d, const OperatorState& s,
                   const std::vector<double>& v, std::vector<double>& out);

// Diagonal of the energy Hessian (for Jacobi preconditioning). Boundary
// entries are set to 1.
std::vector<double> hessian_diag(const CmcDiscretization& d, const OperatorState& s);

// Quadrature of w * rho over the ball with w interpolated from node values.
double weighted_volume(const CmcDiscretization& d, const std::vector<double>& w_nodes);

// Area of the graph of u: quadrature of rho * W with W from in-cell gradients.
double graph_area(const CmcDiscretization& d, const std::vector<double>& u);

// Sum of area-part gradient entries over all nodes with ring < cut; equals
// the discrete flux of rho grad u / W through the cut circle. cut in [1, nr].
double ring_flux(const CmcDiscretization& d, const std::vector<double>& u, int cut);

// rho-weighted volume of the sub-ball of the first `cut` cell rings.
double ring_volume(const CmcDiscretization& d, int cut);

// Weighted intrinsic Laplacian check: lu approximates
// e^{-phi} div_Sigma(e^{phi} grad_Sigma u) with phi = 2 log rho, rhs is
// n gamma H / W, defect their difference. Populated on rings 1..nr-1.
struct LaplacianCheck {
  std::vector<double> lu;
  std::vector<double> rhs;
  std::vector<double> defect;
  double defect_inf = 0.0;       // max |defect| over rings 1..nr-1
  double defect_inf_core = 0.0;  // same, restricted to r >= radius/4; pointwise
                                 // polar truncation is first order at the rings
                                 // next to the pole, second order on the core
};
LaplacianCheck intrinsic_laplacian_check(const WarpedProduct& g, const GraphFunction& u,
                                         double h);

}  // namespace kgl
