#pragma once

// Least-squares fitting of the OMT, Fisher–Rao and WLS path families to a
// sequence of sample covariances P̃_k at knot times t_k:
//   minimize Σ_k ‖P_{t_k} − P̃_k‖_F²  over P0 and the family matrix M
// (Q for omt, A for info and wls). P0 = LL' with L lower triangular and a
// softplus-positive diagonal, so the search is unconstrained. BFGS with
// central-difference gradients and Armijo backtracking, multistarted.

#include <cstdint>
#include <span>
#include <vector>

#include "covpath/path_model.hpp"

namespace covpath {

struct CovSequence {
  std::vector<double> times;
  std::vector<Matrix> matrices;

  std::size_t size() const { return matrices.size(); }
  Index dim() const { return matrices.empty() ? 0 : matrices.front().rows(); }
  /// Nonempty, one time per matrix, strictly increasing times, square
  /// matrices of one dimension, finite entries. Throws DimensionError.
  void validate() const;
};

/// Symmetrizes and clips eigenvalues below 1e-8·λ_max up to that floor.
/// Throws NotPositiveDefiniteError when λ_max ≤ 0.
SpdMatrix psd_repair(const Matrix& m);

/// Knot times mapped affinely onto [0, 1] (a single knot maps to 0).
std::vector<double> normalized_times(const CovSequence& seq);

struct FitOptions {
  double eps = 20.0;  // wls only
  int multistart = 8;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
  int max_iter = 3000;
  double fd_step = 1e-6;  // relative
  double gtol = 1e-12;    // on ‖∇f‖_∞ relative to Σ‖P̃_k‖²
};

struct FitResult {
  Family family = Family::info;
  PathModel params;
  double eps = 0.0;  // wls only
  double objective = 0.0;
  double normalized_error = 0.0;
  int iterations = 0;
  bool converged = false;
  int multistart_index = 0;
  std::vector<double> history;  // objective after each accepted iteration
  std::vector<double> times;    // normalized knot times
};

/// Fits one family. With a single knot the constant path through the
/// repaired matrix is returned. Throws NonConvergenceError (best parameter
/// vector attached as a column) when every start stagnates.
FitResult fit(const CovSequence& seq, Family family, const FitOptions& opts = {});

struct EpsTableRow {
  double eps = 0.0;
  double objective = 0.0;
  double normalized_error = 0.0;
  int multistart_index = 0;
  bool warm = false;  // best start was the previous ε's solution
};

struct EpsSearchResult {
  FitResult best;
  std::vector<EpsTableRow> table;
};

/// Fits the wls family for each ε in order. Every ε after the first also
/// gets the previous ε's solution as an extra start, so its objective never
/// exceeds the cold-start value. Returns the arg-min and the full table.
EpsSearchResult fit_eps_search(const CovSequence& seq, std::span<const double> eps_grid,
                               const FitOptions& opts = {});

/// `steps` log-spaced points from a to b inclusive.
std::vector<double> log_grid(double a, double b, int steps);
/// 16 log-spaced points in [0.1, 100].
std::vector<double> default_eps_grid();

// ---- parameterization ----------------------------------------------------------

/// Parameter count n(n+1)/2 + n².
Index param_count(Index n);
/// [lower-triangular factor (diagonal through inverse softplus), M row-major].
Vector encode_params(const SpdMatrix& p0, const GeneralMatrix& m);
PathModel decode_params(const Vector& x, Index n, Family family, double eps);

/// P0 = repaired P̃_0, M = 0.
Vector initial_guess(const CovSequence& seq, Family family);
/// Start k of a multistart: k = 0 is initial_guess; k > 0 adds seeded
/// N(0, s²) noise to M with s = 0.1·‖log(P̃_0^{-1/2} P̃_K P̃_0^{-1/2})‖_F.
Vector multistart_guess(const CovSequence& seq, Family family, int k, std::uint64_t seed);

/// Σ_k ‖P_{t_k} − P̃_k‖_F² at the normalized times; +inf for infeasible omt Q.
double fit_objective(const PathModel& m, const std::vector<double>& times,
                     const std::vector<Matrix>& targets);

}  // namespace covpath
