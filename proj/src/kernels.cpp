#include "covpath/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

namespace covpath::kernels {

void for_each_index(Index count, const std::function<void(Index)>& body, Exec exec) {
  if (exec == Exec::serial) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1)
  for (Index i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Matrix assemble_columns(Index rows, Index cols, const std::function<Vector(Index)>& column,
                        Exec exec) {
  Matrix out(rows, cols);
  for_each_index(
      cols, [&](Index k) { out.col(k) = column(k); }, exec);
  return out;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double rel_step, Exec exec) {
  Vector g(x.size());
  for_each_index(
      x.size(),
      [&](Index i) {
        const double h = rel_step * std::max(1.0, std::abs(x(i)));
        Vector xp = x;
        Vector xm = x;
        xp(i) += h;
        xm(i) -= h;
        const double fp = f(xp);
        const double fm = f(xm);
        if (std::isfinite(fp) && std::isfinite(fm)) {
          g(i) = (fp - fm) / (xp(i) - xm(i));
          return;
        }
        // One side left the feasible set: fall back to a one-sided quotient.
        const double f0 = f(x);
        if (std::isfinite(fp)) g(i) = (fp - f0) / (xp(i) - x(i));
        else if (std::isfinite(fm)) g(i) = (f0 - fm) / (x(i) - xm(i));
        else g(i) = 0.0;
      },
      exec);
  return g;
}

std::vector<Matrix> window_second_moments(const Matrix& samples, Index window, Index count,
                                          Exec exec) {
  std::vector<Matrix> out(static_cast<std::size_t>(count));
  for_each_index(
      count,
      [&](Index k) {
        const auto block = samples.middleRows(k * window, window);
        Matrix m = block.transpose() * block / static_cast<double>(window);
        out[static_cast<std::size_t>(k)] = 0.5 * (m + m.transpose());
      },
      exec);
  return out;
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace covpath::kernels
