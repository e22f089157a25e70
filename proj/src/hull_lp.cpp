#include "slicing/hull_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slicing/errors.hpp"

namespace slicing {

HullLpResult solve_hull_lp(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& y,
                           const HullLpOptions& options) {
  const Eigen::Index n = vertices.rows();
  const Eigen::Index m = vertices.cols();
  const Eigen::Index rows = n + 1;
  if (y.size() != n) throw SolverError("solve_hull_lp: dimension mismatch");

  Eigen::VectorXd b(rows);
  b.head(n) = y;
  b[n] = 1.0;
  // Flip rows so the right-hand side is nonnegative; artificials then start feasible.
  Eigen::VectorXd sign = b.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
  b = b.cwiseProduct(sign);

  auto column = [&](Eigen::Index j) -> Eigen::VectorXd {
    Eigen::VectorXd a(rows);
    if (j < m) {
      a.head(n) = vertices.col(j);
      a[n] = 1.0;
      return a.cwiseProduct(sign);
    }
    a.setZero();
    a[j - m] = 1.0;
    return a;
  };

  const double feas_tol = options.feasibility_tol * (1.0 + y.cwiseAbs().maxCoeff());
  const double vscale = 1.0 + (m > 0 ? vertices.cwiseAbs().maxCoeff() : 0.0);
  const double opt_tol = 1e-11 * vscale;
  constexpr double kPivotTol = 1e-11;

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = m + i;
  Eigen::MatrixXd binv = Eigen::MatrixXd::Identity(rows, rows);

  const int max_iter = static_cast<int>(60 * rows + 500);
  int degenerate_run = 0;
  HullLpResult result;

  for (int iter = 0;; ++iter) {
    if (iter > max_iter) {
      throw SolverError("solve_hull_lp: iteration cap reached (" + std::to_string(max_iter) + ")");
    }
    result.iterations = iter;
    const Eigen::VectorXd xb = binv * b;
    Eigen::VectorXd cb(rows);
    double objective = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const bool artificial = basis[static_cast<std::size_t>(i)] >= m;
      cb[i] = artificial ? 1.0 : 0.0;
      if (artificial) objective += std::max(xb[i], 0.0);
    }
    result.infeasibility = objective;
    if (objective <= feas_tol) {
      result.feasible = true;
      for (Eigen::Index i = 0; i < rows; ++i) {
        const auto j = basis[static_cast<std::size_t>(i)];
        if (j < m && xb[i] > 0.0) result.weights.emplace_back(j, xb[i]);
      }
      std::sort(result.weights.begin(), result.weights.end());
      return result;
    }

    // Reduced costs of the structural columns: -pi^T A_j.
    const Eigen::RowVectorXd pi = (cb.transpose() * binv).cwiseProduct(sign.transpose());
    const Eigen::RowVectorXd reduced = -(pi.head(n) * vertices).array() - pi[n];

    const bool bland = degenerate_run >= options.degenerate_switch;
    Eigen::Index entering = -1;
    if (!bland) {
      double best = -opt_tol;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (reduced[j] < best) {
          best = reduced[j];
          entering = j;
        }
      }
    } else {
      for (Eigen::Index j = 0; j < m; ++j) {
        if (reduced[j] < -opt_tol) {
          entering = j;
          break;
        }
      }
    }
    if (entering < 0) return result;  // optimal with positive residual

    const Eigen::VectorXd w = binv * column(entering);
    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (w[i] <= kPivotTol) continue;
      const double ratio = std::max(xb[i], 0.0) / w[i];
      const auto bi = basis[static_cast<std::size_t>(i)];
      if (leave < 0 || ratio < best_ratio - 1e-15 * (1.0 + best_ratio)) {
        leave = i;
        best_ratio = ratio;
        continue;
      }
      if (ratio <= best_ratio + 1e-15 * (1.0 + best_ratio)) {
        // Ties: drive artificials out first, then lowest variable index. Under
        // Bland's rule only the index counts.
        const auto cur = basis[static_cast<std::size_t>(leave)];
        const bool a_new = !bland && bi >= m;
        const bool a_cur = !bland && cur >= m;
        if ((a_new && !a_cur) || (a_new == a_cur && bi < cur)) leave = i;
      }
    }
    if (leave < 0) throw SolverError("solve_hull_lp: unbounded phase-1 direction");

    degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
    basis[static_cast<std::size_t>(leave)] = entering;

    Eigen::MatrixXd bmat(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) bmat.col(i) = column(basis[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat);
    if (!lu.isInvertible()) throw SolverError("solve_hull_lp: singular basis");
    binv = lu.inverse();
  }
}

}  // namespace slicing
