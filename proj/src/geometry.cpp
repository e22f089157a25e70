#include "slicing/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "slicing/errors.hpp"

namespace slicing {

namespace {

constexpr double kGramTolerance = 1e-10;

double gram_residual(const Eigen::MatrixXd& frame) {
  const Eigen::MatrixXd gram = frame * frame.transpose();
  return (gram - Eigen::MatrixXd::Identity(frame.rows(), frame.rows())).cwiseAbs().maxCoeff();
}

// Rows of the result are an orthonormal basis of the row space of `rows`.
Eigen::MatrixXd orthonormal_rows(const Eigen::MatrixXd& rows) {
  const auto k = rows.rows();
  const auto n = rows.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rows.transpose());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, rows.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(r(i, i)) <= 1e-12 * scale) {
      throw DomainError("Subspace: normal vectors are linearly dependent");
    }
  }
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  return q.transpose();
}

// Largest eigenvalue of a small symmetric positive semidefinite matrix.
double max_eigenvalue_psd(const Eigen::MatrixXd& g) {
  if (g.rows() == 1) return g(0, 0);
  if (g.rows() == 2) {
    const double tr = 0.5 * (g(0, 0) + g(1, 1));
    const double d = 0.5 * (g(0, 0) - g(1, 1));
    return tr + std::sqrt(d * d + g(0, 1) * g(1, 0));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

Subspace Subspace::from_normals(const Eigen::MatrixXd& normals) {
  const auto k = normals.rows();
  const auto n = normals.cols();
  if (n < 1 || k < 1 || k > n) {
    throw DomainError("Subspace: codim must lie in [1, n], got k=" + std::to_string(k) +
                      " n=" + std::to_string(n));
  }
  Eigen::MatrixXd frame = orthonormal_rows(normals);
  if (gram_residual(frame) > kGramTolerance) frame = orthonormal_rows(frame);
  return Subspace(std::move(frame));
}

Subspace Subspace::from_orthonormal(Eigen::MatrixXd frame) {
  if (frame.cols() < 1 || frame.rows() < 1 || frame.rows() > frame.cols()) {
    throw DomainError("Subspace: codim must lie in [1, n]");
  }
  if (gram_residual(frame) > kGramTolerance) {
    throw DomainError("Subspace: frame is not orthonormal within 1e-10");
  }
  return Subspace(std::move(frame));
}

Eigen::MatrixXd Subspace::projector() const {
  const auto n = frame_.cols();
  return Eigen::MatrixXd::Identity(n, n) - frame_.transpose() * frame_;
}

Eigen::MatrixXd Subspace::basis() const {
  const auto n = frame_.cols();
  const auto k = frame_.rows();
  // Complete the normal frame to an orthonormal basis of R^n; the trailing
  // n - k columns of the full Q span F.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame_.transpose());
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - k).transpose();
}

Subspace Subspace::rotated(const Eigen::MatrixXd& rotation) const {
  if (rotation.rows() != frame_.cols() || rotation.cols() != frame_.cols()) {
    throw DomainError("Subspace::rotated: rotation has wrong size");
  }
  return from_normals(frame_ * rotation.transpose());
}

double distance_to_subspace(const Subspace& F, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != F.ambient_dim()) {
    throw DomainError("distance_to_subspace: dimension mismatch");
  }
  return (F.normal_frame() * x).norm();
}

double projection_metric(const Subspace& F1, const Subspace& F2) {
  if (F1.ambient_dim() != F2.ambient_dim() || F1.codim() != F2.codim()) {
    throw DomainError("projection_metric: subspaces differ in dimension or codimension");
  }
  // Fixed argument order keeps the result exactly symmetric.
  const bool swap = std::lexicographical_compare(
      F2.normal_frame().data(), F2.normal_frame().data() + F2.normal_frame().size(),
      F1.normal_frame().data(), F1.normal_frame().data() + F1.normal_frame().size());
  const auto& u1 = swap ? F2.normal_frame() : F1.normal_frame();
  const auto& u2 = swap ? F1.normal_frame() : F2.normal_frame();
  // Component of F1^perp outside F2^perp; its operator norm is the sine of the
  // largest principal angle.
  const Eigen::MatrixXd residual = u1 - (u1 * u2.transpose()) * u2;
  const double s2 = max_eigenvalue_psd(residual * residual.transpose());
  return std::clamp(std::sqrt(std::max(s2, 0.0)), 0.0, 1.0);
}

Eigen::VectorXd sample_sphere(int n, Rng& rng) {
  if (n < 1) throw DomainError("sample_sphere: n must be >= 1");
  for (;;) {
    Eigen::VectorXd g = standard_normal_vector(n, rng);
    const double r = g.norm();
    if (r > 0.0) return g / r;
  }
}

Subspace sample_grassmannian(int n, int k, Rng& rng) {
  if (n < 1 || k < 1 || k > n) {
    throw DomainError("sample_grassmannian: need 1 <= k <= n");
  }
  Eigen::MatrixXd g(k, n);
  std::normal_distribution<double> normal;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  return Subspace::from_normals(g);
}

Eigen::MatrixXd random_rotation(int n, double step, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = normal(rng);
      s(i, j) = v;
      s(j, i) = -v;
    }
  }
  const double norm = s.norm();
  if (norm > 0.0) s *= step / norm;
  return s.exp();
}

namespace {

// Normal frames of the net members stacked row-wise, so the distance from a
// subspace to every member comes out of one matrix product. For the k x k
// block B = U_i F^T, the sine squared of the largest principal angle is
// 1 - sigma_min(B)^2.
class FrameStack {
 public:
  FrameStack(int n, int k) : k_(k), rows_(0, n) {}

  void push(const Subspace& F) {
    const Eigen::Index need = (count_ + 1) * k_;
    if (need > rows_.rows()) {
      Eigen::MatrixXd grown(std::max<Eigen::Index>(need, 2 * rows_.rows()), rows_.cols());
      grown.topRows(count_ * k_) = rows_.topRows(count_ * k_);
      rows_.swap(grown);
    }
    rows_.middleRows(count_ * k_, k_) = F.normal_frame();
    ++count_;
  }

  double nearest(const Subspace& F) const {
    if (count_ == 0) return 1.0;
    const Eigen::MatrixXd B = rows_.topRows(count_ * k_) * F.normal_frame().transpose();
    double best_cos2 = 0.0;
    for (Eigen::Index i = 0; i < count_; ++i) {
      const auto block = B.middleRows(i * k_, k_);
      double c2;
      if (k_ == 1) {
        c2 = block(0, 0) * block(0, 0);
      } else if (k_ == 2) {
        const double a = block.col(0).squaredNorm();
        const double d = block.col(1).squaredNorm();
        const double b = block.col(0).dot(block.col(1));
        c2 = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
      } else {
        const Eigen::MatrixXd G = block.transpose() * block;
        c2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly)
                 .eigenvalues()[0];
      }
      best_cos2 = std::max(best_cos2, c2);
    }
    return std::sqrt(std::clamp(1.0 - best_cos2, 0.0, 1.0));
  }

 private:
  int k_;
  Eigen::Index count_ = 0;
  Eigen::MatrixXd rows_;
};

}  // namespace

double distance_to_net(const GrassmannNet& net, const Subspace& F) {
  if (F.ambient_dim() != net.ambient_dim || F.codim() != net.codim) {
    throw DomainError("distance_to_net: subspace does not match the net");
  }
  FrameStack stack(net.ambient_dim, net.codim);
  for (const auto& m : net.members) stack.push(m);
  return stack.nearest(F);
}

GrassmannNet build_net(int n, int k, double delta, Rng& rng, std::uint64_t probe_count,
                       std::uint64_t candidate_budget, const NetOptions& options) {
  if (n < 1 || k < 1 || k > n) throw DomainError("build_net: need 1 <= k <= n");
  if (!(delta > 0.0) || delta > std::sqrt(2.0)) {
    throw DomainError("build_net: delta must lie in (0, sqrt(2)]");
  }
  if (probe_count == 0 || candidate_budget == 0) {
    throw DomainError("build_net: probe_count and candidate_budget must be positive");
  }

  GrassmannNet net;
  net.ambient_dim = n;
  net.codim = k;
  net.delta = delta;

  const double pack_radius = delta * (1.0 - options.margin);
  FrameStack stack(n, k);
  auto add_if_far = [&](const Subspace& candidate, double radius) {
    if (!net.members.empty() && stack.nearest(candidate) <= radius) return false;
    if (net.members.size() >= options.max_members) {
      throw ConstructionError("net", "net size exceeds ceiling of " +
                                         std::to_string(options.max_members) +
                                         " members; increase delta");
    }
    net.members.push_back(candidate);
    stack.push(candidate);
    return true;
  };

  add_if_far(sample_grassmannian(n, k, rng), pack_radius);
  std::uint64_t streak = 0;
  while (streak < candidate_budget) {
    if (add_if_far(sample_grassmannian(n, k, rng), pack_radius)) {
      streak = 0;
    } else {
      ++streak;
    }
  }

  // Certificate: every fresh probe must land within delta of a member. Probes
  // that miss are added and the whole probe round is redrawn.
  for (int round = 0; round <= options.repair_rounds; ++round) {
    const std::uint64_t seed = next_seed(rng);
    const ChunkPlan plan{seed, probe_count, 64};
    struct Worst {
      double gap = 0.0;
      std::vector<Subspace> misses;
    };
    auto worst = map_indices(
        plan.chunks,
        [&](std::size_t c) {
          Rng chunk_rng = make_rng(plan.seed, c);
          Worst w;
          const auto count = plan.chunk_trials(static_cast<std::uint32_t>(c));
          for (std::uint64_t t = 0; t < count; ++t) {
            Subspace probe = sample_grassmannian(n, k, chunk_rng);
            const double gap = stack.nearest(probe);
            w.gap = std::max(w.gap, gap);
            if (gap >= delta) w.misses.push_back(std::move(probe));
          }
          return w;
        },
        options.exec);

    double max_gap = 0.0;
    std::vector<Subspace> misses;
    for (auto& w : worst) {
      max_gap = std::max(max_gap, w.gap);
      for (auto& m : w.misses) misses.push_back(std::move(m));
    }
    if (misses.empty()) {
      net.coverage_probes = probe_count;
      net.coverage_max_gap = max_gap;
      return net;
    }
    for (const auto& m : misses) add_if_far(m, pack_radius);
  }
  throw ConstructionError("net", "coverage certificate failed after " +
                                     std::to_string(options.repair_rounds) +
                                     " repair rounds; raise candidate_budget");
}

}  // namespace slicing
