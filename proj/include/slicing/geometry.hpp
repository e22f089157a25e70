#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "slicing/parallel.hpp"
#include "slicing/random.hpp"

namespace slicing {

// Codimension-k linear subspace F of R^n, stored as an orthonormal frame of
// its orthogonal complement (the k rows of normal_frame()).
class Subspace {
 public:
  // Orthonormalizes the rows of `normals` (k x n). Throws DomainError when the
  // rows are not linearly independent or k is outside [1, n].
  static Subspace from_normals(const Eigen::MatrixXd& normals);

  // Takes `frame` as already orthonormal; checks the Gram residual.
  static Subspace from_orthonormal(Eigen::MatrixXd frame);

  int ambient_dim() const { return static_cast<int>(frame_.cols()); }
  int codim() const { return static_cast<int>(frame_.rows()); }
  const Eigen::MatrixXd& normal_frame() const { return frame_; }

  // Orthogonal projection onto F, I - U^T U.
  Eigen::MatrixXd projector() const;
  // (n - k) x n orthonormal rows spanning F.
  Eigen::MatrixXd basis() const;

  // Image of F under the orthogonal map R.
  Subspace rotated(const Eigen::MatrixXd& rotation) const;

 private:
  explicit Subspace(Eigen::MatrixXd frame) : frame_(std::move(frame)) {}
  Eigen::MatrixXd frame_;
};

double distance_to_subspace(const Subspace& F, const Eigen::Ref<const Eigen::VectorXd>& x);

// ||P_1 - P_2||_op, the sine of the largest principal angle between F1 and F2.
double projection_metric(const Subspace& F1, const Subspace& F2);

Eigen::VectorXd sample_sphere(int n, Rng& rng);
Subspace sample_grassmannian(int n, int k, Rng& rng);

// exp(S) for a random skew-symmetric S with ||S||_F = step.
Eigen::MatrixXd random_rotation(int n, double step, Rng& rng);

struct GrassmannNet {
  int ambient_dim = 0;
  int codim = 0;
  double delta = 0.0;
  std::vector<Subspace> members;
  std::uint64_t coverage_probes = 0;
  double coverage_max_gap = 0.0;
};

struct NetOptions {
  // Candidates closer than delta * (1 - margin) to a member are rejected.
  double margin = 0.1;
  std::size_t max_members = std::size_t{1} << 16;
  // Rounds of adding uncovered probes before giving up.
  int repair_rounds = 8;
  Exec exec = Exec::parallel;
};

// Greedy random packing followed by an empirical covering certificate over
// `probe_count` fresh random subspaces. Throws ConstructionError instead of
// returning a net whose certificate fails.
GrassmannNet build_net(int n, int k, double delta, Rng& rng, std::uint64_t probe_count,
                       std::uint64_t candidate_budget, const NetOptions& options = {});

// Distance from F to the nearest net member.
double distance_to_net(const GrassmannNet& net, const Subspace& F);

}  // namespace slicing
