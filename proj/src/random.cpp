#include "covpath/random.hpp"

#include "covpath/sym_basis.hpp"

namespace covpath {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix random_gaussian(Index rows, Index cols, Rng& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  // Fill row-major so the draw order does not depend on Eigen's storage.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

Matrix random_orthogonal(Index n, Rng& rng) {
  const Matrix g = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

SpdMatrix random_spd(Index n, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) lambda(i) = uni(rng);
  const Matrix v = random_orthogonal(n, rng);
  return SpdMatrix(symmetric_part(v * lambda.asDiagonal() * v.transpose()));
}

SymMatrix random_symmetric(Index n, Rng& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector z(sym_dim(n));
  for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  return sym_unvec(z, n);
}

}  // namespace covpath
