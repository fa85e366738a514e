#pragma once

// Rotating-eigenspace weighted-least-squares (WLS) covariance paths.
//
// For a weight ε the running cost is ‖A_s‖² + ε‖A_a‖². Stationary paths are
//   P_t = T_{ε,t}(A0) P0 T_{ε,t}(A0)',
//   T_{ε,t}(A) = e^{(1+ε)A_a t} e^{(A_s + εA_a')t},
// with A0 generated by a symmetric co-state Π through
//   A0 = −½(P0Π + ΠP0) − (1/(2ε))(ΠP0 − P0Π).
// Writing α = (1+ε)/(2ε), the endpoint map is
//   h_α(Π) = e^{α(P0Π−ΠP0)} e^{−P0Π} P0 e^{−ΠP0} e^{α(ΠP0−P0Π)},
// and the boundary-value problem is h_α(Π) = P1. This module solves it by
// continuation from the closed-form α = 0 solution, by damped Gauss–Newton
// from a user guess, and by ε-homotopy sweeps.

#include <span>
#include <string>
#include <vector>

#include "covpath/spd.hpp"

namespace covpath {

/// α = (1 + ε)/(2ε); rejects ε = 0.
double alpha_from_eps(double eps);
/// ε = 1/(2α − 1); rejects α = ½.
double eps_from_alpha(double alpha);

/// T_{ε,t}(A) = e^{(1+ε)A_a t} e^{(A_s + εA_a')t}.
GeneralMatrix transition(const GeneralMatrix& a, double eps, double t);

/// Member of the WLS family: P_t = T_{ε,t}(A0) P0 T_{ε,t}(A0)'.
struct WlsModel {
  SpdMatrix p0;
  GeneralMatrix a0;
  double eps = 1.0;

  Matrix at(double t) const;
  /// A_t = e^{(1+ε)A_a t} A0 e^{(1+ε)A_a' t}.
  GeneralMatrix steering(double t) const;
  SymMatrix a_sym() const;
  SkewMatrix a_skew() const;
  /// ‖A_s‖² + ε‖A_a‖², constant along the path.
  double running_cost() const;
};

SpdMatrix wls_eval(const WlsModel& m, double t);
GeneralMatrix wls_steering(const WlsModel& m, double t);

/// A0 = −½(P0Π + ΠP0) − (1/(2ε))(ΠP0 − P0Π).
GeneralMatrix steering_from_costate(const SpdMatrix& p0, const SymMatrix& pi, double eps);

/// Co-state along the path:
/// Π_t = e^{(1+ε)A_a t} e^{(−A_s+εA_a')t} Π0 e^{(−A_s+εA_a)t} e^{(1+ε)A_a' t}.
SymMatrix costate_at(const WlsModel& m, const SymMatrix& pi0, double t);

SpdMatrix h_map(const SpdMatrix& p0, const SymMatrix& pi, double alpha);

/// Closed-form α = 0 solution Π0 = −½ P0^{-1/2} log(P0^{-1/2} P1 P0^{-1/2}) P0^{-1/2}.
SymMatrix pi_seed(const SpdMatrix& p0, const SpdMatrix& p1);

/// Right-hand side of the fixed-point form of h_α(Π) = P1:
/// −½ P0^{-1/2} log(P0^{-1/2} U P1 U' P0^{-1/2}) P0^{-1/2}, U = e^{α(ΠP0 − P0Π)}.
SymMatrix fixed_point_rhs(const SpdMatrix& p0, const SpdMatrix& p1, const SymMatrix& pi,
                          double alpha);

/// Linear map on S^n stored as an m×m array in the fixed orthonormal basis
/// (see sym_basis.hpp), m = n(n+1)/2.
struct SymLinearOperator {
  Index n = 0;
  Matrix array;

  SymMatrix apply(const SymMatrix& d) const;
  double norm() const;  // largest singular value
};

/// Precomputed pieces of the linearization of the fixed-point map at (Π, α).
/// The endpoint used is P̂1 = h_α(Π), so U P̂1 U' = e^{−P0Π} P0 e^{−ΠP0} and
/// Q = P0^{-1/2} U P̂1 U' P0^{-1/2} = e^{−2 P0^{1/2} Π P0^{1/2}}.
class HhatContext {
 public:
  HhatContext(const SpdMatrix& p0, const SymMatrix& pi, double alpha);

  /// ĥ_{α,P0,Π}(Δ).
  SymMatrix apply(const SymMatrix& d) const;
  /// Maps an endpoint perturbation to the co-state perturbation it forces:
  /// −½ P0^{-1/2} M_Q^{-1}(P0^{-1/2} U ΔP U' P0^{-1/2}) P0^{-1/2}.
  SymMatrix endpoint_to_costate(const SymMatrix& dp) const;
  /// Inverse of endpoint_to_costate.
  SymMatrix costate_to_endpoint(const SymMatrix& dpi) const;
  /// Directional derivative of h_α at Π: costate_to_endpoint((I − αĥ)(Δ)).
  SymMatrix h_derivative(const SymMatrix& d) const;

  const SpdMatrix& endpoint() const { return p1hat_; }
  const Matrix& rotation() const { return u_; }

 private:
  SpdMatrix p0_;
  double alpha_;
  Matrix p0_half_;
  Matrix p0_inv_half_;
  Matrix generator_;  // α(ΠP0 − P0Π), skew
  Matrix u_;          // e^{generator}
  SpdMatrix q_;
  SpdMatrix p1hat_;
};

SymLinearOperator hhat_operator(const SpdMatrix& p0, const SymMatrix& pi, double alpha,
                                Exec exec = Exec::serial);

/// Jacobian of Π ↦ h_α(Π) as an m×m array in the symmetric basis.
Matrix h_jacobian(const SpdMatrix& p0, const SymMatrix& pi, double alpha,
                  Exec exec = Exec::serial);

// ---- boundary-value solvers --------------------------------------------------

struct WlsSolution {
  WlsModel model;
  SymMatrix pi;
  double alpha = 0.0;
  double residual = 0.0;  // ‖h_α(Π) − P1‖_F
  double cost = 0.0;      // ∫ running cost = ‖A_s‖² + ε‖A_a‖²
  std::string branch;
  int iterations = 0;
};

/// Builds a solution record from Π (no solving).
WlsSolution make_solution(const SpdMatrix& p0, const SpdMatrix& p1, const SymMatrix& pi,
                          double alpha, std::string branch, int iterations = 0);

struct LocalOptions {
  double tol_rel = 1e-9;  // relative to ‖P1‖_F
  int max_iter = 200;
  int max_backtracks = 40;
  std::string branch = "init";
  Exec exec = Exec::serial;
};

/// Damped Gauss–Newton on r(Π) = ‖h_α(Π) − P1‖_F² from `init`.
/// Throws StagnationError (with the best iterate) when the line search fails
/// and NonConvergenceError when max_iter is exhausted.
WlsSolution solve_local(const SpdMatrix& p0, const SpdMatrix& p1, double alpha,
                        const SymMatrix& init, const LocalOptions& opts = {});

struct ContinuationOptions {
  int steps = 200;
  bool override_bound = false;
  double tol_rel = 1e-8;  // relative to ‖P1‖_F
  double max_condition = 1e12;
  Exec exec = Exec::serial;
};

/// Integrates dΠ/dτ = (I − ατ·ĥ)^{-1}(α·ĥ(Π)) from pi_seed with RK4, then
/// refines with solve_local. Requires |α| below existence_bound unless
/// overridden.
WlsSolution solve_continuation(const SpdMatrix& p0, const SpdMatrix& p1, double alpha,
                               const ContinuationOptions& opts = {});

/// ε values from eps_start to eps_target, geometrically spaced (both included).
std::vector<double> geometric_grid(double eps_start, double eps_target, int count);

/// Tracks one solution branch across `eps_grid`, warm-starting solve_local at
/// each ε from the previous solution. Returns one solution per grid point.
std::vector<WlsSolution> solve_homotopy(const SpdMatrix& p0, const SpdMatrix& p1,
                                        std::span<const double> eps_grid, const SymMatrix& init,
                                        const LocalOptions& opts = {});

/// Recovers the forward solution P0 → P1 from a solution of the reversed
/// problem P1 → P0 with the same ε: Π0 = −Π_rev(1).
WlsSolution time_reversed(const WlsSolution& reversed, const SpdMatrix& p0);

/// Sufficient bound on |α| for existence and uniqueness of h_α(Π) = P1:
/// max{λmin(P0)λmin(P1)/(‖P0‖_a λmax(P1)), λmin(P0)λmin(P1)/(‖P1‖_a λmax(P0))},
/// with λ/0 = +∞.
double existence_bound(const SpdMatrix& p0, const SpdMatrix& p1);

/// ‖log(P0^{-1/2}(P0^{1/2}P1P0^{1/2})^{1/2}P0^{-1/2})‖_F²; bounds the optimal
/// WLS cost for every ε > 0.
double wls_cost_upper_bound(const SpdMatrix& p0, const SpdMatrix& p1);

}  // namespace covpath
