#pragma once

#include <vector>

#include <Eigen/Dense>

namespace slicing {

// Phase-1 revised simplex for: does y = sum_j w_j v_j with w >= 0, sum w = 1?
// `vertices` holds one vertex per column. Pivoting is Dantzig's rule with
// lowest-index ties, switching to Bland's rule after a run of degenerate
// pivots, so the verdict is a deterministic function of the input.
struct HullLpResult {
  bool feasible = false;
  // Minimal L1 equality residual found (0 when feasible up to tolerance).
  double infeasibility = 0.0;
  int iterations = 0;
  // Nonzero convex weights when feasible: (vertex index, weight).
  std::vector<std::pair<Eigen::Index, double>> weights;
};

struct HullLpOptions {
  // Equality residual tolerance, scaled by 1 + max|y_i|.
  double feasibility_tol = 1e-8;
  int degenerate_switch = 50;
};

// Throws SolverError on a singular basis or when the iteration cap is hit.
HullLpResult solve_hull_lp(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& y,
                           const HullLpOptions& options = {});

}  // namespace slicing
