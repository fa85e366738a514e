#pragma once

// Closed-form OMT (Bures–Wasserstein) and Fisher–Rao geodesics, their
// steering matrices A_t with dP/dt = A_t P + P A_t', and the quadratic
// running costs whose minimizers they are.

#include "covpath/quadrature.hpp"
#include "covpath/spd.hpp"

namespace covpath {

/// P_t = (I − tQ) P0 (I − tQ)'. Q is symmetric with eigenvalues < 1 for a true
/// geodesic and arbitrary in the fitting family.
struct GeodesicOmt {
  SpdMatrix p0;
  GeneralMatrix q;

  Matrix at(double t) const;
  /// Q(tQ − I)^{-1}; throws DegenerateParameterError when tQ − I is singular.
  GeneralMatrix steering(double t) const;
};

/// P_t = e^{At} P0 e^{A't}; SPD for every t.
struct GeodesicInfo {
  SpdMatrix p0;
  GeneralMatrix a;

  Matrix at(double t) const;
  GeneralMatrix steering(double) const { return a; }
};

GeodesicOmt omt_geodesic(const SpdMatrix& p0, const SpdMatrix& p1);
GeneralMatrix omt_steering(const GeodesicOmt& g, double t);

/// Optimal path for the weighted cost tr(W A P A'): the OMT geodesic between
/// W^{1/2}P0W^{1/2} and W^{1/2}P1W^{1/2}, mapped back by W^{-1/2}. The result
/// is again an OMT-family path with Q_W = W^{-1/2} Q̃ W^{1/2}.
GeodesicOmt omt_geodesic_weighted(const SpdMatrix& p0, const SpdMatrix& p1, const SpdMatrix& w);

/// A = ½ P0^{1/2} log(P0^{-1/2} P1 P0^{-1/2}) P0^{-1/2}.
GeodesicInfo info_geodesic(const SpdMatrix& p0, const SpdMatrix& p1);

/// Feasibility rule for the OMT fitting family: rejects Q when
/// min over a 33-point grid of |det(I − tQ)|^{1/n} < 1e-6·‖I − tQ‖_F.
bool omt_feasible(const GeneralMatrix& q);

// ---- running costs -----------------------------------------------------------

/// tr(A P A')
double cost_f(const Matrix& p, const GeneralMatrix& a);
/// tr(W A P A')
double cost_fW(const Matrix& w, const Matrix& p, const GeneralMatrix& a);
/// 2 tr(A A + P^{-1} A P A')
double cost_info1(const Matrix& p, const GeneralMatrix& a);
/// 4 tr(P^{-1} A P A')
double cost_info2(const Matrix& p, const GeneralMatrix& a);
/// ‖A_s‖_F² + ε‖A_a‖_F²
double cost_eps(double eps, const GeneralMatrix& a);

enum class CostKind { f, f_weighted, info1, info2, eps };

struct CostSelector {
  CostKind kind = CostKind::f;
  Matrix weight;     // f_weighted only
  double eps = 1.0;  // eps only

  static CostSelector omt() { return {CostKind::f, {}, 1.0}; }
  static CostSelector weighted(const SpdMatrix& w) { return {CostKind::f_weighted, w.mat(), 1.0}; }
  static CostSelector info1() { return {CostKind::info1, {}, 1.0}; }
  static CostSelector info2() { return {CostKind::info2, {}, 1.0}; }
  static CostSelector wls(double eps) { return {CostKind::eps, {}, eps}; }
};

double running_cost(const CostSelector& sel, const Matrix& p, const GeneralMatrix& a);

inline constexpr int kDefaultQuadPoints = 64;

/// ∫₀¹ running cost along a model exposing at(t) and steering(t), by
/// Gauss–Legendre quadrature.
template <class Model>
double path_cost(const Model& model, const CostSelector& sel, int quad_points = kDefaultQuadPoints) {
  const QuadratureRule rule = gauss_legendre(quad_points);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = rule.nodes[k];
    total += rule.weights[k] * running_cost(sel, model.at(t), model.steering(t));
  }
  return total;
}

}  // namespace covpath
