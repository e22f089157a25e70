#include "slicing/specialfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "slicing/errors.hpp"

namespace slicing {

namespace {

// ln Gamma(1 + z) = -gamma z + sum_{j>=2} (-1)^j zeta(j) z^j / j, |z| < 1.
constexpr double kEulerGamma = 0.5772156649015328606065121;
constexpr std::array<double, 25> kZeta = {
    1.644934066848226436472415,  1.202056903159594285399738,  1.082323233711138191516004,
    1.036927755143369926331365,  1.017343061984449139714518,  1.008349277381922826839798,
    1.004077356197944339378685,  1.002008392826082214417853,  1.000994575127818085337146,
    1.000494188604119464558702,  1.000246086553308048298638,  1.000122713347578489146752,
    1.000061248135058704829259,  1.000030588236307020493552,  1.000015282259408651871733,
    1.000007637197637899762274,  1.000003817293264999839856,  1.000001908212716553938926,
    1.000000953962033872796113,  1.000000476932986787806463,  1.00000023845050272773299,
    1.000000119219925965311073,  1.00000005960818905125948,   1.00000002980350351465228,
    1.000000014901554828365041};  // zeta(2) .. zeta(26)

double log_gamma_one_plus(double z) {
  double acc = 0.0;
  double zp = z * z;
  for (std::size_t i = 0; i < kZeta.size(); ++i) {
    const int j = static_cast<int>(i) + 2;
    const double term = kZeta[i] * zp / j;
    acc += (j % 2 == 0) ? term : -term;
    zp *= z;
  }
  return -kEulerGamma * z + acc;
}

// B_{2j} / (2j (2j - 1)), j = 1..8.
constexpr std::array<double, 8> kStirling = {
    1.0 / 12.0,     -1.0 / 360.0,   1.0 / 1260.0,  -1.0 / 1680.0,
    1.0 / 1188.0,   -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0};

double stirling(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double corr = 0.0;
  double p = inv;
  for (double c : kStirling) {
    corr += c * p;
    p *= inv2;
  }
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + corr;
}

constexpr double kStirlingFloor = 15.0;
constexpr double kTaylorRadius = 0.2;

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1) throw DomainError("gauss_legendre: order must be positive");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] -> [0, 1]; store in increasing order.
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 0.5 * w;
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

namespace {

double adaptive_panel(const std::function<double(double)>& f, const QuadratureRule& rule,
                      double a, double b, double whole, double tol_density, int depth,
                      int max_depth) {
  const double m = 0.5 * (a + b);
  const double left = rule.apply(f, a, m);
  const double right = rule.apply(f, m, b);
  const double refined = left + right;
  if (std::abs(refined - whole) <= tol_density * (b - a) || depth >= max_depth) return refined;
  return adaptive_panel(f, rule, a, m, left, tol_density, depth + 1, max_depth) +
         adaptive_panel(f, rule, m, b, right, tol_density, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const IntegrationOptions& opts, const std::vector<double>& breaks) {
  if (!(b > a)) throw DomainError("integrate: empty or reversed interval");
  const auto& rule = gauss_legendre(opts.order);

  std::vector<double> edges{a};
  for (double x : breaks) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> coarse(edges.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    coarse[i] = rule.apply(f, edges[i], edges[i + 1]);
    total += std::abs(coarse[i]);
  }
  const double tol = std::max(opts.abs_tol, opts.rel_tol * total);
  const double density = tol / (b - a);

  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    sum += adaptive_panel(f, rule, edges[i], edges[i + 1], coarse[i], density, 0, opts.max_depth);
  }
  return sum;
}

double log_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  if (std::abs(x - 1.0) < kTaylorRadius) return log_gamma_one_plus(x - 1.0);
  if (std::abs(x - 2.0) < kTaylorRadius) return std::log1p(x - 2.0) + log_gamma_one_plus(x - 2.0);
  if (x >= kStirlingFloor) return stirling(x);

  // Gamma(x) = Gamma(x + r) / (x (x + 1) ... (x + r - 1)).
  double prod = 1.0;
  double y = x;
  while (y < kStirlingFloor) {
    prod *= y;
    y += 1.0;
  }
  return stirling(y) - std::log(prod);
}

double log_sphere_surface(int m) {
  if (m < 1) throw DomainError("sphere_surface: dimension must be >= 1");
  const double h = 0.5 * m;
  return std::log(2.0) + h * std::log(std::numbers::pi) - log_gamma(h);
}

double sphere_surface(int m) { return std::exp(log_sphere_surface(m)); }

double gamma_inequality_margin(double lambda, double mu) {
  if (!(mu >= 0.0) || !(mu < lambda) || !std::isfinite(lambda)) {
    throw DomainError("gamma_inequality_margin: need 0 <= mu < lambda");
  }
  return mu * std::log(lambda) + log_gamma(lambda - mu) - log_gamma(lambda);
}

double expectation_integral(int n, int k, double beta, int order) {
  if (n < 2 || k < 1 || k > n - 1) {
    throw DomainError("expectation_integral: need 1 <= k <= n - 1 (k = n is unsupported)");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("expectation_integral: beta must be positive");
  }
  const double log_c = log_sphere_surface(k) + log_sphere_surface(n - k) - log_sphere_surface(n);
  const double scale = beta * static_cast<double>(n) * n;
  const int pc = k - 1;
  const int ps = n - k - 1;
  auto integrand = [&](double a) {
    const double c = std::cos(a);
    const double s = std::sin(a);
    return std::exp(-scale * c * c) * std::pow(c, pc) * std::pow(s, ps);
  };

  // The mass sits where cos(a) ~ 1 / sqrt(scale); give the adaptive scheme
  // panel edges at that width.
  const double half_pi = 0.5 * std::numbers::pi;
  std::vector<double> breaks;
  for (double w : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double t = w / std::sqrt(scale);
    if (t < 1.0) breaks.push_back(std::acos(t));
  }
  IntegrationOptions opts;
  opts.order = order;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-14;
  const double angular = integrate(integrand, 0.0, half_pi, opts, breaks);
  return std::exp(log_c) * angular;
}

}  // namespace slicing
