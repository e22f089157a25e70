#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "slicing/density.hpp"
#include "slicing/parallel.hpp"
#include "slicing/random.hpp"

namespace slicing {

// Origin-symmetric polytope given by its vertex list.
class VPolytope {
 public:
  // `vertices` is m x n, one vertex per row. Requires the row set to be closed
  // under negation and m >= 2n. The circumradius defaults to the largest
  // vertex norm and may only be raised.
  explicit VPolytope(const Eigen::MatrixXd& vertices, double circumradius = 0.0);

  int ambient_dim() const { return static_cast<int>(columns_.rows()); }
  Eigen::Index vertex_count() const { return columns_.cols(); }
  // n x m, one vertex per column.
  const Eigen::MatrixXd& vertex_columns() const { return columns_; }
  Eigen::MatrixXd vertices() const { return columns_.transpose(); }
  double circumradius() const { return circumradius_; }
  double max_vertex_norm() const { return max_norm_; }

  VPolytope scaled(double t) const;

 private:
  Eigen::MatrixXd columns_;
  double circumradius_ = 0.0;
  double max_norm_ = 0.0;
  // Largest r with all of +-r e_i among the vertices (0 if some axis is missing).
  double axis_radius_ = 0.0;

  friend bool contains(const VPolytope&, const Eigen::Ref<const Eigen::VectorXd>&, double);
};

// x in scale * P, deciding the convex-combination LP with tolerance 1e-8.
// Cheap exact screens run first: the circumscribed ball, the hyperplane
// normal to x, and the inscribed axis cross-polytope. Throws SolverError if
// the LP cannot decide.
bool contains(const VPolytope& P, const Eigen::Ref<const Eigen::VectorXd>& x, double scale = 1.0);

// r theta in P for `probes` random directions; false on the first miss.
bool contains_ball_check(const VPolytope& P, double r, std::uint64_t probes, Rng& rng);

struct VolumeEstimate {
  double volume = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double ball_volume = 0.0;
};

struct VolumeOptions {
  double hit_rate_floor = 1e-4;
  std::uint64_t pilot_trials = 4000;
  Exec exec = Exec::parallel;
};

// Hit-or-miss estimate of |scale * P| inside the ball of radius
// scale * circumradius. Throws UndersampledError when the hit rate of the
// pilot run or of the full run is below the floor.
VolumeEstimate volume_estimate(const VPolytope& P, Rng& rng, std::uint64_t trials,
                               double scale = 1.0, const VolumeOptions& options = {});

// vol^{1/n} / sqrt(log(m / n)) for a body inside the ball of radius n with m vertices.
double gluskin_ratio(int n, double m, double vol);

// Volume of the radius-r ball in R^n.
double ball_volume(int n, double r);

}  // namespace slicing
