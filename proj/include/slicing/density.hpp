#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "slicing/geometry.hpp"
#include "slicing/parallel.hpp"
#include "slicing/random.hpp"
#include "slicing/specialfn.hpp"

namespace slicing {

// Equal-weight mixture of standard Gaussians centred at a set of points that
// is closed under negation, so the density is even.
class GaussianMixture {
 public:
  // `centers` is M x n, one center per row. Throws DomainError unless M >= 2,
  // M is even and every row's negation is also a row.
  explicit GaussianMixture(Eigen::MatrixXd centers);

  // Centers {p_1, -p_1, p_2, -p_2, ...} from the rows p_i of `half`.
  static GaussianMixture symmetric_from(const Eigen::MatrixXd& half);

  int ambient_dim() const { return static_cast<int>(centers_.cols()); }
  int size() const { return static_cast<int>(centers_.rows()); }
  const Eigen::MatrixXd& centers() const { return centers_; }

 private:
  Eigen::MatrixXd centers_;
};

// True when every row's negation is also a row (exact comparison).
bool closed_under_negation(const Eigen::MatrixXd& rows);

using Membership = std::function<bool(const Eigen::VectorXd&)>;

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
};

McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t trials);

double density_eval(const GaussianMixture& f, const Eigen::Ref<const Eigen::VectorXd>& x);

// (1/M) sum_i exp(-beta d(F, p_i)^2).
double phi_average(const GaussianMixture& f, const Subspace& F, double beta);

// Integral of f over F with respect to (n-k)-dimensional Lebesgue measure:
// (2 pi)^{-k/2} (1/M) sum_i exp(-d(F, p_i)^2 / 2).
double section_integral(const GaussianMixture& f, const Subspace& F);

// Mass of {x : member(x)} under f, sampling x = p_i + g with i uniform and g
// standard normal.
McEstimate mass_in_set(const GaussianMixture& f, const Membership& member, Rng& rng,
                       std::uint64_t trials, Exec exec = Exec::parallel);

struct TailCheck {
  McEstimate tail;
  double bound = 0.25;
  bool holds() const { return tail.estimate <= bound + 3.0 * tail.std_error; }
};

// P(|g|^2 >= 4n) for g standard normal in R^n, against the Markov bound 1/4.
TailCheck gaussian_tail_check(int n, Rng& rng, std::uint64_t trials, Exec exec = Exec::parallel);

struct BisphericalOptions {
  IntegrationOptions alpha{20, 1e-300, 1e-11, 40};
  int circle_points = 32;       // S^1: trapezoid
  int sphere2_order = 12;       // S^2: Gauss-Legendre in z times 2*order azimuths
  int mc_pairs = 32;            // S^{d-1}, d >= 4: antithetic Monte Carlo pairs
};

// Integral of g over S^{n-1}, n = m + k (m, k >= 1), in bispherical coordinates
// v = (cos(a) x, sin(a) y), x in S^{m-1}, y in S^{k-1}, a in [0, pi/2], with
// Jacobian cos(a)^{m-1} sin(a)^{k-1}. S^0, S^1 and S^2 factors use fixed
// product rules; larger spheres use seeded antithetic Monte Carlo.
double bispherical_integrate(int n, int m, int k,
                             const std::function<double(const Eigen::VectorXd&)>& g,
                             Rng& rng, const BisphericalOptions& options = {});

}  // namespace slicing
