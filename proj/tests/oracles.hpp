#pragma once

// Reference implementations used only by the tests. None of them calls the
// library routine it is checking.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "covpath/random.hpp"
#include "covpath/types.hpp"

namespace oracle {

using covpath::Index;
using covpath::Matrix;
using covpath::Vector;

// Truncated Taylor series with scaling and squaring.
inline Matrix taylor_expm(const Matrix& a) {
  const Index n = a.rows();
  int s = 0;
  double norm = a.lpNorm<1>();
  while (norm > 0.25) {
    norm *= 0.5;
    ++s;
  }
  const Matrix b = a / std::ldexp(1.0, s);
  Matrix term = Matrix::Identity(n, n);
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// Gauss–Legendre nodes/weights on [-1, 1] via Newton on P_n (independent of
// the library's quadrature).
inline void gl_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// ∫_a^b f by composite Gauss–Legendre (panels × 20 nodes).
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64) {
  std::vector<double> x, w;
  gl_nodes(20, x, w);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < x.size(); ++i) total += 0.5 * h * w[i] * f(c + 0.5 * h * x[i]);
  }
  return total;
}

// M_X^{-1}(D) = ∫_0^∞ (X + τI)^{-1} D (X + τI)^{-1} dτ. The range [0, τ_max]
// is integrated on log-spaced panels; the tail uses the expansion
// (X+τ)^{-1} = τ^{-1} − Xτ^{-2} + …, giving D/τ_max − (XD + DX)/(2τ_max²).
inline Matrix logdiv_quadrature(const Matrix& x, const Matrix& d) {
  const Index n = x.rows();
  const Matrix eye = Matrix::Identity(n, n);
  const double tau_max = 1e6;
  Matrix total = Matrix::Zero(n, n);
  std::vector<double> gx, gw;
  gl_nodes(20, gx, gw);
  const double u0 = std::log(1e-8), u1 = std::log(tau_max);
  const int panels = 400;
  const double h = (u1 - u0) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = u0 + (p + 0.5) * h;
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double tau = std::exp(c + 0.5 * h * gx[i]);
      const Matrix r = (x + tau * eye).inverse();
      total += 0.5 * h * gw[i] * tau * (r * d * r);
    }
  }
  // [0, 1e-8]: integrand ≈ X^{-1} D X^{-1}.
  const Matrix xi = x.inverse();
  total += 1e-8 * xi * d * xi;
  total += d / tau_max - (x * d + d * x) / (2.0 * tau_max * tau_max);
  return total;
}

// max over unit symmetric Δ of ‖ΔP − PΔ‖_F: random search, then power
// iteration on L'L started from the best sample (local ascent).
inline double brute_pseudonorm(const Matrix& p, std::uint64_t seed, int samples = 100000) {
  const Index n = p.rows();
  covpath::Rng rng(seed);
  std::normal_distribution<double> normal;
  auto ratio = [&](const Matrix& d) { return (d * p - p * d).norm() / d.norm(); };
  Matrix best = Matrix::Identity(n, n);
  double best_r = 0.0;
  for (int s = 0; s < samples; ++s) {
    Matrix g(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) g(i, j) = normal(rng);
    const Matrix d = g + g.transpose();
    const double r = ratio(d);
    if (r > best_r) {
      best_r = r;
      best = d;
    }
  }
  Matrix d = best / best.norm();
  for (int it = 0; it < 500; ++it) {
    const Matrix c = d * p - p * d;  // L(Δ), skew
    Matrix ltl = c * p - p * c;  // L'(L(Δ)) under the Frobenius inner product
    ltl = 0.5 * (ltl + ltl.transpose());
    if (ltl.norm() == 0.0) break;
    d = ltl / ltl.norm();
    best_r = std::max(best_r, ratio(d));
  }
  return best_r;
}

// RK4 for dP/dt = A_t P + P A_t' with a fixed step; returns P(1).
inline Matrix rk4_endpoint(const Matrix& p0, const std::function<Matrix(double)>& a, int steps) {
  auto f = [&](double t, const Matrix& p) {
    const Matrix at = a(t);
    return Matrix(at * p + p * at.transpose());
  };
  Matrix p = p0;
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const Matrix k1 = f(t, p);
    const Matrix k2 = f(t + h / 2, p + h / 2 * k1);
    const Matrix k3 = f(t + h / 2, p + h / 2 * k2);
    const Matrix k4 = f(t + h, p + h * k3);
    p += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return p;
}

// Principal square root of an SPD matrix by Denman–Beavers iteration
// (no eigendecomposition).
inline Matrix db_sqrt(const Matrix& a) {
  Matrix y = a;
  Matrix z = Matrix::Identity(a.rows(), a.cols());
  for (int it = 0; it < 100; ++it) {
    const Matrix yi = y.inverse();
    const Matrix zi = z.inverse();
    const Matrix yn = 0.5 * (y + zi);
    z = 0.5 * (z + yi);
    if ((yn - y).norm() <= 1e-15 * yn.norm()) {
      y = yn;
      break;
    }
    y = yn;
  }
  return y;
}

inline Matrix random_matrix(Index n, covpath::Rng& rng, double scale = 1.0) {
  return covpath::random_gaussian(n, n, rng, scale);
}

}  // namespace oracle
