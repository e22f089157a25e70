#include "slicing/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slicing/errors.hpp"
#include "slicing/hull_lp.hpp"
#include "slicing/specialfn.hpp"

namespace slicing {

VPolytope::VPolytope(const Eigen::MatrixXd& vertices, double circumradius) {
  const auto m = vertices.rows();
  const auto n = vertices.cols();
  if (n < 1) throw DomainError("VPolytope: empty dimension");
  if (m < 2 * n) {
    throw DomainError("VPolytope: need at least 2n vertices, got " + std::to_string(m));
  }
  if (!vertices.allFinite()) throw DomainError("VPolytope: non-finite vertex");
  if (!closed_under_negation(vertices)) {
    throw DomainError("VPolytope: vertex set is not origin-symmetric");
  }
  columns_ = vertices.transpose();
  max_norm_ = columns_.colwise().norm().maxCoeff();
  // Norms computed elsewhere may differ from these in the last bits.
  if (circumradius != 0.0 && circumradius < max_norm_ * (1.0 - 1e-12)) {
    throw DomainError("VPolytope: circumradius below the largest vertex norm");
  }
  circumradius_ = std::max(circumradius, max_norm_);

  // Axis vertices t e_i; symmetry already guarantees -t e_i.
  Eigen::VectorXd axis = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::Index nz = -1;
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (columns_(i, j) != 0.0) {
        nz = i;
        ++count;
      }
    }
    if (count == 1) axis[nz] = std::max(axis[nz], std::abs(columns_(nz, j)));
  }
  axis_radius_ = axis.minCoeff();
}

VPolytope VPolytope::scaled(double t) const {
  if (!(t > 0.0)) throw DomainError("VPolytope::scaled: factor must be positive");
  // Scaling rounds vertex norms and the radius independently.
  VPolytope out(t * vertices());
  out.circumradius_ = std::max(out.max_norm_, t * circumradius_);
  return out;
}

bool contains(const VPolytope& P, const Eigen::Ref<const Eigen::VectorXd>& x, double scale) {
  if (x.size() != P.ambient_dim()) throw DomainError("contains: dimension mismatch");
  if (!(scale > 0.0)) throw DomainError("contains: scale must be positive");
  const Eigen::VectorXd y = x / scale;
  const double norm = y.norm();
  if (norm == 0.0) return true;
  const double tol = 1e-8 * (1.0 + y.cwiseAbs().maxCoeff());
  if (norm > P.max_norm_ + tol) return false;

  // <z, y> <= h on the hull; |y|^2 > h puts y strictly outside.
  const double h = (P.columns_.transpose() * y).maxCoeff();
  if ((norm * norm - h) / norm > tol) return false;

  if (P.axis_radius_ > 0.0 && y.lpNorm<1>() <= P.axis_radius_) return true;

  return solve_hull_lp(P.columns_, y).feasible;
}

bool contains_ball_check(const VPolytope& P, double r, std::uint64_t probes, Rng& rng) {
  if (r < 0.0) throw DomainError("contains_ball_check: radius must be nonnegative");
  for (std::uint64_t i = 0; i < probes; ++i) {
    const Eigen::VectorXd theta = sample_sphere(P.ambient_dim(), rng);
    if (!contains(P, r * theta)) return false;
  }
  return true;
}

double ball_volume(int n, double r) {
  if (n < 1) throw DomainError("ball_volume: n must be >= 1");
  if (r == 0.0) return 0.0;
  return std::exp(log_sphere_surface(n) - std::log(static_cast<double>(n)) + n * std::log(r));
}

VolumeEstimate volume_estimate(const VPolytope& P, Rng& rng, std::uint64_t trials, double scale,
                               const VolumeOptions& options) {
  if (trials < 10000) throw DomainError("volume_estimate: need at least 10^4 trials");
  if (!(scale > 0.0)) throw DomainError("volume_estimate: scale must be positive");
  const int n = P.ambient_dim();
  const double radius = scale * P.circumradius();

  auto trial = [&](Rng& r) {
    Eigen::VectorXd u = standard_normal_vector(n, r);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double len = radius * std::pow(unif(r), 1.0 / n) / u.norm();
    return contains(P, len * u, scale);
  };

  // Pilot in batches until enough hits are seen to trust the rate, or until
  // the floor can be ruled out.
  const std::uint64_t pilot_seed = next_seed(rng);
  const std::uint64_t pilot_cap =
      static_cast<std::uint64_t>(std::ceil(25.0 / options.hit_rate_floor));
  std::uint64_t pilot_hits = 0;
  std::uint64_t pilot_total = 0;
  for (std::uint64_t batch = 0; pilot_hits < 25 && pilot_total < pilot_cap; ++batch) {
    const ChunkPlan plan{derive_seed(pilot_seed, batch), options.pilot_trials, 16};
    pilot_hits += count_hits(plan, trial, options.exec);
    pilot_total += options.pilot_trials;
  }
  const double pilot_rate = static_cast<double>(pilot_hits) / static_cast<double>(pilot_total);
  if (pilot_rate < options.hit_rate_floor) {
    throw UndersampledError("volume_estimate: pilot hit rate " + std::to_string(pilot_rate) +
                            " below floor " + std::to_string(options.hit_rate_floor) +
                            " in dimension " + std::to_string(n) + "; use a lower dimension");
  }

  const ChunkPlan plan{next_seed(rng), trials, 64};
  const auto hits = count_hits(plan, trial, options.exec);
  const McEstimate rate = binomial_estimate(hits, trials);
  if (rate.estimate < options.hit_rate_floor) {
    throw UndersampledError("volume_estimate: hit rate " + std::to_string(rate.estimate) +
                            " below floor; use a lower dimension");
  }
  VolumeEstimate v;
  v.ball_volume = ball_volume(n, radius);
  v.volume = v.ball_volume * rate.estimate;
  v.std_error = v.ball_volume * rate.std_error;
  v.hits = hits;
  v.trials = trials;
  return v;
}

double gluskin_ratio(int n, double m, double vol) {
  if (n < 2 || !(m > n)) throw DomainError("gluskin_ratio: need m > n >= 2");
  if (!(vol > 0.0)) throw DomainError("gluskin_ratio: volume must be positive");
  return std::pow(vol, 1.0 / n) / std::sqrt(std::log(m / n));
}

}  // namespace slicing
