#pragma once

// Seeded random matrices. Every random draw in the library goes through an
// explicitly seeded Rng; there is no global random state.

#include <cstdint>
#include <random>

#include "covpath/spd.hpp"

namespace covpath {

using Rng = std::mt19937_64;

/// Decorrelated child seed (splitmix64 of seed + stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(Index n, Rng& rng);

/// V diag(λ) V' with λ uniform in [lo, hi] and V Haar-orthogonal.
SpdMatrix random_spd(Index n, Rng& rng, double lo = 0.5, double hi = 3.0);

/// Σ z_k B_k over the orthonormal symmetric basis, z_k ~ N(0, scale²):
/// diagonal entries have variance scale², off-diagonal ones scale²/2.
SymMatrix random_symmetric(Index n, Rng& rng, double scale = 1.0);

/// Entries i.i.d. N(0, scale²).
Matrix random_gaussian(Index rows, Index cols, Rng& rng, double scale = 1.0);

}  // namespace covpath
