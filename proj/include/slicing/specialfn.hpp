#pragma once

#include <functional>
#include <vector>

namespace slicing {

// Fixed-order rule on [0, 1]. Apply to [a, b] by affine map.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  template <class F>
  double apply(F&& f, double a, double b) const {
    const double h = b - a;
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(a + h * nodes[i]);
    return s * h;
  }
};

// Gauss-Legendre rule with `order` nodes, mapped to [0, 1]. Cached per order.
const QuadratureRule& gauss_legendre(int order);

struct IntegrationOptions {
  int order = 20;
  double abs_tol = 1e-15;
  double rel_tol = 1e-13;
  int max_depth = 48;
};

// Adaptive bisection: a panel is accepted when the rule on the panel agrees
// with the rule on its two halves. `breaks` are extra panel boundaries inside
// (a, b) where the integrand changes scale.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const IntegrationOptions& opts = {}, const std::vector<double>& breaks = {});

// ln Gamma(x) for x > 0. Stirling series (Bernoulli-number coefficients) after
// upward recurrence, with Taylor series of ln Gamma(1 + z) around the zeros at
// x = 1 and x = 2 so relative accuracy holds there as well.
double log_gamma(double x);

// kappa_m: (m-1)-dimensional measure of the unit sphere S^{m-1} in R^m.
// kappa_1 = 2 (counting measure on {-1, +1}).
double sphere_surface(int m);
double log_sphere_surface(int m);

// mu ln(lambda) + ln Gamma(lambda - mu) - ln Gamma(lambda). Nonnegative by the
// gamma inequality for 0 <= mu < lambda.
double gamma_inequality_margin(double lambda, double mu);

// E exp(-beta d(F, n theta)^2) for theta uniform on S^{n-1} and F of codim k,
// written as kappa_k kappa_{n-k} / kappa_n times the angular integral
//   int_0^{pi/2} exp(-beta n^2 cos^2 a) cos^{k-1} a sin^{n-k-1} a da,
// which is the t = cos(a) form without its endpoint singularity at t = 1.
// Requires 1 <= k <= n - 1 and beta > 0.
double expectation_integral(int n, int k, double beta, int order = 24);

}  // namespace slicing
