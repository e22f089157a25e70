#include "slicing/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "slicing/errors.hpp"

namespace slicing {

namespace {

bool row_less(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::VectorXd& b) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (a(i, j) < b[j]) return true;
    if (a(i, j) > b[j]) return false;
  }
  return false;
}

}  // namespace

bool closed_under_negation(const Eigen::MatrixXd& c) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(c.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return row_less(c, x, c.row(y).transpose());
  });
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const Eigen::VectorXd neg = -c.row(i).transpose();
    auto it = std::lower_bound(order.begin(), order.end(), neg,
                               [&](Eigen::Index r, const Eigen::VectorXd& v) {
                                 return row_less(c, r, v);
                               });
    if (it == order.end() || c.row(*it).transpose() != neg) return false;
  }
  return true;
}

namespace {

void check_dim(const GaussianMixture& f, Eigen::Index n, const char* who) {
  if (n != f.ambient_dim()) throw DomainError(std::string(who) + ": dimension mismatch");
}

}  // namespace

GaussianMixture::GaussianMixture(Eigen::MatrixXd centers) : centers_(std::move(centers)) {
  if (centers_.rows() < 2 || centers_.rows() % 2 != 0) {
    throw DomainError("GaussianMixture: need an even number M >= 2 of centers");
  }
  if (centers_.cols() < 1) throw DomainError("GaussianMixture: empty dimension");
  if (!centers_.allFinite()) throw DomainError("GaussianMixture: non-finite center");
  if (!closed_under_negation(centers_)) {
    throw DomainError("GaussianMixture: center set is not closed under negation");
  }
}

GaussianMixture GaussianMixture::symmetric_from(const Eigen::MatrixXd& half) {
  Eigen::MatrixXd c(2 * half.rows(), half.cols());
  for (Eigen::Index i = 0; i < half.rows(); ++i) {
    c.row(2 * i) = half.row(i);
    c.row(2 * i + 1) = -half.row(i);
  }
  return GaussianMixture(std::move(c));
}

McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t trials) {
  McEstimate e;
  e.hits = hits;
  e.trials = trials;
  if (trials == 0) return e;
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  e.estimate = p;
  e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return e;
}

double density_eval(const GaussianMixture& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(f, x.size(), "density_eval");
  const auto& c = f.centers();
  const Eigen::VectorXd logs = -0.5 * (c.rowwise() - x.transpose()).rowwise().squaredNorm();
  const double top = logs.maxCoeff();
  const double lse = top + std::log((logs.array() - top).exp().sum());
  const double n = f.ambient_dim();
  return std::exp(lse - std::log(static_cast<double>(f.size())) -
                  0.5 * n * std::log(2.0 * std::numbers::pi));
}

double phi_average(const GaussianMixture& f, const Subspace& F, double beta) {
  check_dim(f, F.ambient_dim(), "phi_average");
  // d(F, p_i)^2 = |U p_i|^2 for the normal frame U.
  const Eigen::MatrixXd proj = f.centers() * F.normal_frame().transpose();
  const Eigen::ArrayXd d2 = proj.rowwise().squaredNorm().array();
  return (-beta * d2).exp().mean();
}

double section_integral(const GaussianMixture& f, const Subspace& F) {
  const double k = F.codim();
  return std::pow(2.0 * std::numbers::pi, -0.5 * k) * phi_average(f, F, 0.5);
}

McEstimate mass_in_set(const GaussianMixture& f, const Membership& member, Rng& rng,
                       std::uint64_t trials, Exec exec) {
  if (trials < 1000) throw DomainError("mass_in_set: need at least 1000 trials");
  const ChunkPlan plan{next_seed(rng), trials, 64};
  const int n = f.ambient_dim();
  const auto m = static_cast<std::uint64_t>(f.size());
  const auto hits = count_hits(
      plan,
      [&](Rng& r) {
        std::uniform_int_distribution<std::uint64_t> pick(0, m - 1);
        const auto i = static_cast<Eigen::Index>(pick(r));
        Eigen::VectorXd x = f.centers().row(i).transpose() + standard_normal_vector(n, r);
        return member(x);
      },
      exec);
  return binomial_estimate(hits, trials);
}

TailCheck gaussian_tail_check(int n, Rng& rng, std::uint64_t trials, Exec exec) {
  if (n < 1) throw DomainError("gaussian_tail_check: n must be >= 1");
  if (trials < 10000) throw DomainError("gaussian_tail_check: need at least 10^4 trials");
  const ChunkPlan plan{next_seed(rng), trials, 64};
  const double radius2 = 4.0 * n;
  const auto hits = count_hits(
      plan, [&](Rng& r) { return standard_normal_vector(n, r).squaredNorm() >= radius2; }, exec);
  TailCheck check;
  check.tail = binomial_estimate(hits, trials);
  return check;
}

namespace {

struct SphereRule {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
};

SphereRule sphere_rule(int d, Rng& rng, const BisphericalOptions& o) {
  SphereRule rule;
  if (d == 1) {
    rule.points = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
    rule.weights = {1.0, 1.0};
  } else if (d == 2) {
    const int p = o.circle_points;
    for (int i = 0; i < p; ++i) {
      const double t = 2.0 * std::numbers::pi * (i + 0.5) / p;
      Eigen::VectorXd v(2);
      v << std::cos(t), std::sin(t);
      rule.points.push_back(v);
      rule.weights.push_back(2.0 * std::numbers::pi / p);
    }
  } else if (d == 3) {
    const auto& gl = gauss_legendre(o.sphere2_order);
    const int az = 2 * o.sphere2_order;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double z = 2.0 * gl.nodes[i] - 1.0;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int j = 0; j < az; ++j) {
        const double t = 2.0 * std::numbers::pi * (j + 0.5) / az;
        Eigen::VectorXd v(3);
        v << rho * std::cos(t), rho * std::sin(t), z;
        rule.points.push_back(v);
        rule.weights.push_back(2.0 * gl.weights[i] * 2.0 * std::numbers::pi / az);
      }
    }
  } else {
    const double w = sphere_surface(d) / (2.0 * o.mc_pairs);
    for (int i = 0; i < o.mc_pairs; ++i) {
      Eigen::VectorXd v = sample_sphere(d, rng);
      rule.points.push_back(v);
      rule.points.push_back(-v);
      rule.weights.push_back(w);
      rule.weights.push_back(w);
    }
  }
  return rule;
}

}  // namespace

double bispherical_integrate(int n, int m, int k,
                             const std::function<double(const Eigen::VectorXd&)>& g, Rng& rng,
                             const BisphericalOptions& options) {
  if (m < 1 || k < 1) {
    throw DomainError("bispherical_integrate: both factor dimensions must be >= 1");
  }
  if (m + k != n) throw DomainError("bispherical_integrate: need m + k = n");
  const SphereRule xs = sphere_rule(m, rng, options);
  const SphereRule ys = sphere_rule(k, rng, options);
  const double half_pi = 0.5 * std::numbers::pi;

  double total = 0.0;
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < xs.points.size(); ++i) {
    for (std::size_t j = 0; j < ys.points.size(); ++j) {
      const auto& x = xs.points[i];
      const auto& y = ys.points[j];
      auto integrand = [&](double a) {
        const double c = std::cos(a);
        const double s = std::sin(a);
        v.head(m) = c * x;
        v.tail(k) = s * y;
        return g(v) * std::pow(c, m - 1) * std::pow(s, k - 1);
      };
      total += xs.weights[i] * ys.weights[j] * integrate(integrand, 0.0, half_pi, options.alpha);
    }
  }
  return total;
}

}  // namespace slicing
