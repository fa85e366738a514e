#pragma once

// Independent ground truth for the closed-form and solved paths: RK4
// integration of dP/dt = A_t P + P A_t', composite Simpson quadrature of
// running costs, a generator of feasible non-geodesic paths with the same
// endpoints, and the consistency checks behind the `verify` command.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "covpath/path_model.hpp"

namespace covpath {

struct SampledPath {
  std::vector<double> times;
  std::vector<Matrix> matrices;

  std::size_t size() const { return times.size(); }
  /// times[0] = 0, times.back() = 1, strictly increasing, every matrix SPD
  /// of one shared dimension. Throws DimensionError / NotPositiveDefiniteError.
  void validate() const;
};

/// A sampled path together with A_t at the same times.
struct SteeredPath {
  SampledPath path;
  std::vector<GeneralMatrix> steering;
};

inline constexpr int kDefaultFlowSteps = 1000;

/// Classical RK4 for dP/dt = A_t P + P A_t' on a uniform grid of `steps`
/// intervals over [0, 1]. Re-symmetrizes after every step. Throws FlowError
/// with the failing t when P stops being positive definite.
SampledPath integrate_flow(const SpdMatrix& p0, const std::function<GeneralMatrix(double)>& steering,
                           int steps = kDefaultFlowSteps);

/// Samples a model and its steering at `steps + 1` uniform times.
SteeredPath sample_model(const PathModel& m, int steps);

enum class BaseFamily { info, omt };

/// P_t = G_t B_t G_t' where B_t is the info (or OMT) geodesic P0 → P1 and
/// G_t = e^{B t(1−t)} for a seeded random symmetric B with ‖B‖_F ~ scale.
/// Endpoints are preserved exactly since G_0 = G_1 = I. Steering is
/// A_t = ½ Ṗ_t P_t^{-1}, with Ṗ_t evaluated analytically.
SteeredPath perturbed_feasible_path(const SpdMatrix& p0, const SpdMatrix& p1, std::uint64_t seed,
                                    BaseFamily base = BaseFamily::info,
                                    int steps = kDefaultFlowSteps, double scale = 1.0);

/// ∫ running cost over the samples: composite Simpson when the grid is
/// uniform with an even number of intervals, trapezoid otherwise.
double quadrature_cost(const SampledPath& path, const std::vector<GeneralMatrix>& steering,
                       const CostSelector& sel);

struct VerifyReport {
  double r0 = 0.0;               // ‖P(0) − P0‖_F / ‖P0‖_F
  double r1 = 0.0;               // ‖P(1) − P1‖_F / ‖P1‖_F, 0 when no target
  double flow_residual = 0.0;    // max relative flow-equation defect
  double cost_constancy = 0.0;   // max − min of the WLS running cost, 0 otherwise
  double sample_residual = 0.0;  // stored samples vs. model, 0 when none
  bool pass = false;
  std::uint64_t seed = 0;
};

struct VerifyOptions {
  double tol = 1e-6;
  std::optional<SpdMatrix> p1;  // target endpoint, if known
  std::uint64_t seed = 0;       // drives the extra random check times
  int grid = 33;
  int random_times = 16;
  double fd_step = 1e-5;
};

/// Checks a model against its own flow equation by central differences of
/// P_t on a uniform grid plus seeded random times.
VerifyReport verify_model(const PathModel& m, const VerifyOptions& opts = {});

/// Same checks when a model is available together with stored samples: the
/// samples must also reproduce the model.
VerifyReport verify_model(const PathModel& m, const SteeredPath& samples,
                          const VerifyOptions& opts = {});

/// Checks sampled data only: dP/dt is estimated by finite differences of
/// the samples (fourth order on uniform grids), so the achievable residual
/// is limited by the sampling density.
VerifyReport verify_sampled(const SteeredPath& samples, const std::optional<SpdMatrix>& p0,
                            const VerifyOptions& opts = {});

}  // namespace covpath
