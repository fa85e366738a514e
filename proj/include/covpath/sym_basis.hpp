#pragma once

// Fixed orthonormal basis of the symmetric matrices S^n:
// E_ii and (E_ij + E_ji)/√2 for i < j, ordered lexicographically by (i, j).
// Coordinates in this basis preserve the Frobenius inner product.

#include "covpath/spd.hpp"

namespace covpath {

constexpr Index sym_dim(Index n) { return n * (n + 1) / 2; }

/// k-th basis element of S^n.
SymMatrix sym_basis(Index n, Index k);

/// Coordinates of the symmetric part of m.
Vector sym_vec(const Matrix& m);

SymMatrix sym_unvec(const Vector& v, Index n);

/// Recovers n from m = n(n+1)/2; throws DimensionError if m is not triangular.
Index sym_order(Index m);

}  // namespace covpath
