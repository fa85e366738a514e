#pragma once

// Data-parallel kernels. Every kernel has an `Exec::serial` reference path;
// the `Exec::parallel` path (OpenMP) must produce bit-identical results because
// each output element is computed independently by the same code.

#include <functional>
#include <vector>

#include "covpath/types.hpp"

namespace covpath::kernels {

/// Calls body(i) for i in [0, count). Exceptions thrown by any body are
/// rethrown on the calling thread (the lowest index wins).
void for_each_index(Index count, const std::function<void(Index)>& body, Exec exec);

/// Matrix whose k-th column is column(k), k in [0, cols).
Matrix assemble_columns(Index rows, Index cols, const std::function<Vector(Index)>& column,
                        Exec exec);

/// Central-difference gradient with per-coordinate step rel_step·max(1, |x_i|).
/// Where f is +inf on one side the quotient is one-sided; on both sides, 0.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double rel_step, Exec exec);

/// Second moments (1/L)·Σ x x' of `count` consecutive windows of `window`
/// rows each (samples is T×n).
std::vector<Matrix> window_second_moments(const Matrix& samples, Index window, Index count,
                                          Exec exec);

/// Number of worker threads the parallel path uses.
int max_threads();
void set_threads(int n);

}  // namespace covpath::kernels
