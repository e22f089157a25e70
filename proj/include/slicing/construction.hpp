#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicing/density.hpp"
#include "slicing/geometry.hpp"
#include "slicing/parallel.hpp"
#include "slicing/polytope.hpp"
#include "slicing/random.hpp"

namespace slicing {

inline constexpr int kMaxDimension = 14;
inline constexpr int kMaxPoints = 1 << 18;
inline constexpr std::size_t kMaxNetSize = std::size_t{1} << 16;

struct ConstructionParams {
  int n = 8;
  int k = 1;
  int points = 4096;  // N; the mixture has M = 2N centers
  // Net radius. Unset means n^{-k/2-1}.
  std::optional<double> delta;
  std::uint64_t net_probes = 10000;
  std::uint64_t candidate_budget = 1000;
  std::uint64_t mc_trials = 20000;
  int search_restarts = 8;
  int search_steps = 300;
  std::uint64_t master_seed = 1;
  double beta = 1.0;
  int point_retries = 8;
  int max_dimension = kMaxDimension;
  // Most members a net may have before the build gives up on this delta.
  std::size_t net_budget = kMaxNetSize;

  double resolved_delta() const;
  double point_threshold() const;  // 3 n^{-k/2}
  // Throws DomainError for parameters outside the desk-scale ceilings.
  void validate() const;
};

// (1/N) sum_i exp(-beta d(F, scale * theta_i)^2) over the rows theta_i of `points`.
double empirical_average_phi(const Eigen::MatrixXd& points, const Subspace& F, double scale,
                             double beta);

struct GoodPoints {
  Eigen::MatrixXd points;  // N x n unit rows
  double sup_over_net = 0.0;
  double threshold = 0.0;         // 3 n^{-k/2}
  double extension_bound = 0.0;   // sup_over_net + n delta
  int attempts = 0;
};

// Redraws N uniform sphere points until the net supremum of the beta-average
// is at most 3 n^{-k/2}. Throws ConstructionError naming the best supremum.
GoodPoints find_good_points(const ConstructionParams& params, const GrassmannNet& net, Rng& rng,
                            Exec exec = Exec::parallel);

struct ChernoffResult {
  McEstimate tail;        // frequency of {average >= 3p}
  double bound = 0.0;     // exp(-pN)
  double preflight_mean = 0.0;
  bool holds() const { return tail.estimate <= bound + 3.0 * tail.std_error; }
};

using UnitSampler = std::function<double(Rng&)>;

// Frequency over `trials` batches of N draws of {mean >= 3p}. The sampler's
// mean is checked against p in a pre-flight run; DomainError if it exceeds
// p + 3 standard errors.
ChernoffResult chernoff_check(double p, int N, std::uint64_t trials, Rng& rng,
                              const UnitSampler& sampler, Exec exec = Exec::parallel);

struct Construction {
  VPolytope body;         // K0
  GaussianMixture density;  // f0
  Eigen::MatrixXd points;
};

// Centers {+-n theta_i}; vertices are the centers and +-n e_j.
Construction build_construction(int n, const Eigen::MatrixXd& points);

// f(y) = |3K0| (int_{3K0} f0)^{-1} f0(a y) restricted to K, with a = |3K0|^{1/n}.
// Its section over a codim-k subspace F equals a^k / mass3 * int_F f0.
struct NormalizedDensity {
  std::shared_ptr<const GaussianMixture> base;
  double scale = 1.0;  // a
  double mass3 = 1.0;  // int_{3K0} f0

  double section(const Subspace& F) const;
};

struct Normalization {
  VPolytope body;  // K = K0 / |K0|^{1/n}
  NormalizedDensity density;
  VolumeEstimate volume_k0;
  VolumeEstimate volume_3k0;
  VolumeEstimate volume_k;
  McEstimate mass3;
  McEstimate mass_ak;    // int_{aK} f0, common random numbers with mass3
  double unit_mass = 0.0;          // int_K f
  double unit_mass_tolerance = 0.0;
};

// Throws ConstructionError("mass", ...) when int_{3K0} f0 < 3/4 - 3 sigma and
// ConstructionError("normalize", ...) when a volume or mass identity fails.
Normalization normalize(const Construction& c, Rng& rng, std::uint64_t mc_trials,
                        Exec exec = Exec::parallel);

struct SearchResult {
  Subspace best;
  double value = 0.0;
  std::vector<double> trace;
};

using SectionObjective = std::function<double(const Subspace&)>;

// Multi-start hill climbing over codim-k subspaces. Each step rotates the
// normal frame by exp(S) with ||S||_F annealed from 0.3 to 1e-3 and keeps
// improvements. Climbs start from the best of a screening pool made of the net
// members (when given) and 64 random subspaces per restart. The returned value
// is a lower bound on the maximum.
SearchResult max_section_search(const SectionObjective& objective, int n, int k, int restarts,
                                int steps, Rng& rng, const GrassmannNet* net = nullptr,
                                Exec exec = Exec::parallel);

// max_section^{-1/k}: lower bound on d_ovr(K, BP_k^n) up to the universal constant.
double dovr_certificate(double max_section_value, int k);

struct ConstructionReport {
  ConstructionParams params;
  double delta = 0.0;
  GoodPoints good;
  std::size_t net_size = 0;
  std::uint64_t net_probes = 0;
  double net_max_gap = 0.0;
  std::uint64_t extension_probes = 0;
  double extension_probe_sup = 0.0;
  double gluskin = 0.0;
  std::optional<Normalization> norm;
  std::optional<SearchResult> search;
  double section_f0_at_max = 0.0;        // int_F f0 at the argmax
  double phi_lemma_at_max = 0.0;         // (1/M) sum exp(-d^2), lemma normalization
  double phi_section_at_max = 0.0;       // (1/M) sum exp(-d^2 / 2), section normalization
  double section_bound = 0.0;            // 4 (2 pi n)^{-k/2}
  double normalized_section = 0.0;       // max_section^{1/k} / sqrt(k log n / n)
  double certificate = 0.0;
  std::map<std::string, double> wall_seconds;
};

ConstructionReport run_construction(const ConstructionParams& params, Exec exec = Exec::parallel);

struct SweepRow {
  int n = 0;
  int k = 0;
  int points = 0;
  double delta = 0.0;
  double sup_over_net = 0.0;
  double vol_est = 0.0;
  double mass3 = 0.0;
  double max_section = 0.0;
  double certificate = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

// Net radii tried by a sweep cell when none is given: n^{-k/2-1} times powers
// of `ratio`, ending at 1. A cell takes the first rung whose net fits the budget.
std::vector<double> delta_ladder(int n, int k, double ratio = 1.2);

// N = ceil(c n^{k/2+4}), the growth of the point count in the existence
// argument with a desk-scale constant c, clamped to [1, 2^18].
int scaled_point_count(int n, int k, double c);

// One row per (n, k) cell. Failing cells are recorded with their stage in
// `status` and the sweep continues. With `point_constant` set, each cell uses
// scaled_point_count instead of base.points.
std::vector<SweepRow> run_sweep(const std::vector<int>& ns, const std::vector<int>& ks,
                                const ConstructionParams& base,
                                std::optional<double> point_constant = std::nullopt,
                                Exec exec = Exec::parallel);

}  // namespace slicing
