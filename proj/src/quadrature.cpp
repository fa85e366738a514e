#include "covpath/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "covpath/error.hpp"

namespace covpath {

QuadratureRule gauss_legendre(int points, double a, double b) {
  if (points < 1) throw Error("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const int n = points;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

double simpson(std::span<const double> values, double a, double b) {
  const std::size_t m = values.size();
  if (m < 3 || m % 2 == 0) throw Error("simpson: need an odd number (>= 3) of samples");
  const double h = (b - a) / static_cast<double>(m - 1);
  double s = values.front() + values.back();
  for (std::size_t k = 1; k + 1 < m; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * values[k];
  return s * h / 3.0;
}

}  // namespace covpath
