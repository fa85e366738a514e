#pragma once

#include <span>
#include <vector>

namespace covpath {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss–Legendre rule with `points` nodes mapped to [a, b].
QuadratureRule gauss_legendre(int points, double a = 0.0, double b = 1.0);

/// Composite Simpson on a uniform grid; `values.size()` must be odd and ≥ 3.
double simpson(std::span<const double> values, double a, double b);

}  // namespace covpath
