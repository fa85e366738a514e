#include "covpath/sym_basis.hpp"

#include <cmath>
#include <numbers>

#include "covpath/error.hpp"

namespace covpath {

namespace {
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
}

SymMatrix sym_basis(Index n, Index k) {
  Vector v = Vector::Zero(sym_dim(n));
  v(k) = 1.0;
  return sym_unvec(v, n);
}

Vector sym_vec(const Matrix& m) {
  const Index n = m.rows();
  Vector v(sym_dim(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    v(k++) = m(i, i);
    for (Index j = i + 1; j < n; ++j) v(k++) = (m(i, j) + m(j, i)) * kInvSqrt2;
  }
  return v;
}

SymMatrix sym_unvec(const Vector& v, Index n) {
  if (v.size() != sym_dim(n)) throw DimensionError("sym_unvec: coordinate count mismatch");
  Matrix m(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    m(i, i) = v(k++);
    for (Index j = i + 1; j < n; ++j) {
      m(i, j) = m(j, i) = v(k++) * kInvSqrt2;
    }
  }
  return SymMatrix(m);
}

Index sym_order(Index m) {
  const auto n = static_cast<Index>(std::llround((std::sqrt(8.0 * m + 1.0) - 1.0) / 2.0));
  if (sym_dim(n) != m) throw DimensionError("sym_order: not a triangular number");
  return n;
}

}  // namespace covpath
