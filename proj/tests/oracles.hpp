#pragma once

// Reference solvers that share no code with the library's solver path.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Product-trapezoid weights for J^a on a uniform grid (piecewise linear
// interpolant integrated exactly against (t_n - s)^{a - 1} / Gamma(a)).
// Returns (J^a g)(t_n) given g_0..g_n.
class ProductTrapezoid {
 public:
  ProductTrapezoid(double a, double h) : a_(a), scale_(std::pow(h, a) / std::tgamma(a + 2.0)) {}

  double weight(int n, int k) const {
    const double a1 = a_ + 1.0;
    if (k == 0) return std::pow(n - 1.0, a1) - (n - a_ - 1.0) * std::pow(n, a_);
    if (k == n) return 1.0;
    return std::pow(n - k + 1.0, a1) - 2.0 * std::pow(n - k, a1) + std::pow(n - k - 1.0, a1);
  }
  double scale() const { return scale_; }

  double apply(const std::vector<double>& g, int n) const {
    if (n == 0) return 0.0;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) s += weight(n, k) * g[static_cast<std::size_t>(k)];
    return scale_ * s;
  }

 private:
  double a_, scale_;
};

// Scalar c_m D^m F + c_n D^n F = phi on [0, x_max] with F(0) = 0 data,
// discretized directly on `steps` uniform intervals: with F = J^m G the
// equation is c_m G + c_n J^{m - n} G = phi, marched point by point.
// Returns F at t_k = k x_max / steps.
inline std::vector<double> two_term_scalar(double c_m, double c_n, double m, double n,
                                           const std::function<double(double)>& phi, double x_max, int steps) {
  const double h = x_max / steps;
  const ProductTrapezoid ja(m - n, h), jm(m, h);
  std::vector<double> g(static_cast<std::size_t>(steps) + 1, 0.0);
  g[0] = phi(0.0) / c_m;
  for (int i = 1; i <= steps; ++i) {
    double hist = 0.0;
    for (int k = 0; k < i; ++k) hist += ja.weight(i, k) * g[static_cast<std::size_t>(k)];
    g[static_cast<std::size_t>(i)] = (phi(i * h) - c_n * ja.scale() * hist) / (c_m + c_n * ja.scale());
  }
  std::vector<double> f(g.size());
  for (int i = 0; i <= steps; ++i) f[static_cast<std::size_t>(i)] = jm.apply(g, i);
  return f;
}

}  // namespace oracles
