#pragma once

#include <string>
#include <vector>

#include "kgl/config.hpp"
#include "kgl/estimates.hpp"
#include "kgl/mesh.hpp"
#include "kgl/report.hpp"

namespace kgl {

// Membership of a sampled graph in the height region
// 0 <= u <= (C - log(alpha rho))/(alpha beta), checked with 1e-12 slack.
struct RegionCheck {
  bool in_region = false;
  int checked = 0;
  int violations = 0;
  double min_u = 0.0;
  double worst_margin = 0.0;  // min over samples of min(u, ceiling - u)
  double worst_r = 0.0;
  double worst_theta = 0.0;
};

RegionCheck region_check(const WarpedProduct& g, const std::vector<Point>& xs,
                         const std::vector<double>& u, double alpha, double beta,
                         double big_c);
RegionCheck region_check(const WarpedProduct& g, const PolarMesh& mesh,
                         const std::vector<double>& u, double alpha, double beta,
                         double big_c);

// Per-node dump of a solved field: r, theta, u, w, residual, defect.
CsvTable fields_table(const WarpedProduct& g, const PolarMesh& mesh,
                      const std::vector<double>& u, double h);

// One sweep row. Solution columns are NaN when no solve reached them; the
// constant-chain block is NaN when its hypotheses were not evaluable.
struct ExperimentRow {
  std::string family;
  double big_r = 0.0;
  double h = 0.0;
  bool converged = false;
  bool in_region = false;
  double u_p = 0.0;     // measured center height
  double sup_u = 0.0;   // max |u| over nodes
  double grad_p = 0.0;  // |grad u| at the center
  double slack = 0.0;   // grad_p / d
  double residual = 0.0;
  double defect = 0.0;
  std::string verdict;  // pass | fail | unmet | info
  std::string note;
  bool chain_ok = false;
  EstimateInputs inputs;
  EstimateConstants constants;
};

struct ExperimentReport {
  std::string experiment;
  std::string geometry_id;    // hex geometry hash
  std::string geometry_text;  // canonical description
  std::vector<ExperimentRow> rows;
  std::string verdict;  // PASS | FAIL | INCONCLUSIVE

  // fail beats pass beats inconclusive; a fail verdict requires a row whose
  // hypotheses all held
  void settle_verdict();
  int exit_code() const;  // 0 / 1 / 2
  CsvTable to_csv() const;
};

struct ExperimentOptions {
  std::string out_dir;  // when nonempty: report.csv and fields_*.csv are written
  bool plots = false;   // also write plot_*.svg
};

// Sweeps R x H x target center height on 2D ball solves, verifies region
// membership, evaluates the gradient bound at the center, and asserts
// grad_p <= d on every row whose hypotheses held.
ExperimentReport exp_gradient_bound(const GeometryConfig& cfg,
                                    const ExperimentOptions& opt = {});

// H = 0 sweeps over growing balls with the fixed boundary menu
// {zero, fixed-arc-length bump, ceiling-scaled}: slice recovery, decreasing
// center data, and the ball-independent bound.
ExperimentReport exp_rigidity(const GeometryConfig& cfg,
                              const ExperimentOptions& opt = {});

// Existence-radius contrast: every H != 0 dies at r* = 1/|H| on the flat
// constant-rho model, H = 0 solves at every radius.
ExperimentReport exp_slab_minimal(const GeometryConfig& cfg,
                                  const ExperimentOptions& opt = {});

// Slice defects, weighted-Laplacian defect convergence on an exact radial
// graph, agreement order of the two residual forms on random smooth fields,
// and the ambient Ricci bound against closed forms.
ExperimentReport exp_identity_suite(const GeometryConfig& cfg,
                                    const ExperimentOptions& opt = {});

// Dispatch by name: gradient-bound | rigidity | slab-minimal | identities.
ExperimentReport run_experiment(const std::string& name, const GeometryConfig& cfg,
                                const ExperimentOptions& opt = {});

}  // namespace kgl
