#pragma once

// Symmetric / SPD matrix value types, spectral matrix functions, Fréchet
// derivative operators of exp and log, and the two Riemannian distances
// (Bures–Wasserstein and Fisher–Rao).

#include <functional>

#include "covpath/types.hpp"

namespace covpath {

/// Relative asymmetry accepted (and removed) when building a SymMatrix.
inline constexpr double kSymTol = 1e-9;
/// Strict positive definiteness: lambda_min > kSpdTol * lambda_max.
inline constexpr double kSpdTol = 1e-12;
/// Eigenvalue gaps below this fraction of lambda_max use the analytic limit
/// in divided-difference formulas.
inline constexpr double kDegenerateGap = 1e-8;

/// Real symmetric n×n matrix. Entries are exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  /// Symmetrizes `m` when ‖m − m'‖_F ≤ kSymTol·‖m‖_F, throws NotSymmetricError
  /// otherwise.
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(Index n);
  static SymMatrix identity(Index n);

  const Matrix& mat() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double norm() const { return m_.norm(); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator-() const;
  SymMatrix operator*(double s) const;
  friend SymMatrix operator*(double s, const SymMatrix& a) { return a * s; }

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}
  friend SymMatrix symmetric_part(const Matrix& m);

  Matrix m_;
};

/// (M + M')/2 for any square M, without the asymmetry check.
SymMatrix symmetric_part(const Matrix& m);

/// Real skew-symmetric matrix with an exactly zero diagonal.
class SkewMatrix {
 public:
  SkewMatrix() = default;
  /// Takes (M − M')/2 of the argument.
  static SkewMatrix skew_part(const Matrix& m);

  const Matrix& mat() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

 private:
  explicit SkewMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Symmetric positive definite matrix with its eigendecomposition computed on
/// construction. Immutable, so safe to share between threads.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  /// Throws NotSymmetricError or NotPositiveDefiniteError.
  explicit SpdMatrix(const Matrix& m);
  explicit SpdMatrix(const SymMatrix& s);

  static SpdMatrix identity(Index n);
  static SpdMatrix diagonal(const Vector& d);

  const Matrix& mat() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  const Vector& eigenvalues() const noexcept { return evals_; }
  const Matrix& eigenvectors() const noexcept { return evecs_; }
  double lambda_min() const { return evals_(0); }
  double lambda_max() const { return evals_(evals_.size() - 1); }
  SymMatrix sym() const;

  /// V·diag(f(λ))·V'.
  Matrix spectral(const std::function<double(double)>& f) const;

 private:
  void decompose();

  Matrix m_;
  Vector evals_;
  Matrix evecs_;
};

/// Eigendecomposition of a symmetric matrix, ascending eigenvalues.
struct SymEigen {
  Vector values;
  Matrix vectors;
};
SymEigen sym_eigen(const SymMatrix& s);

// ---- spectral functions ---------------------------------------------------

SpdMatrix spd_sqrt(const SpdMatrix& p);
SpdMatrix spd_inv_sqrt(const SpdMatrix& p);
SpdMatrix spd_inverse(const SpdMatrix& p);
SymMatrix spd_log(const SpdMatrix& p);
SpdMatrix spd_exp(const SymMatrix& s);
/// Principal real power P^t, any real t.
SpdMatrix spd_power(const SpdMatrix& p, double t);

/// exp of an arbitrary square matrix (Padé scaling-and-squaring).
Matrix expm(const Matrix& a);
/// exp of a skew matrix; the result is orthogonal.
Matrix expm_skew(const SkewMatrix& k);

// ---- Fréchet operators -----------------------------------------------------

/// M_X(D) with X = exp(generator): the Fréchet derivative of the matrix
/// exponential at `generator` applied to D. Uses the 2n×2n block-triangular
/// exponential.
Matrix frechet_mult(const Matrix& generator, const Matrix& d);

/// M_X(D) = ∫₀¹ X^{1−τ} D X^τ dτ for SPD X, evaluated spectrally.
SymMatrix frechet_mult_spd(const SpdMatrix& x, const SymMatrix& d);

/// M_X^{-1}(D): the Fréchet derivative of log at X applied to D.
SymMatrix frechet_logdiv(const SpdMatrix& x, const SymMatrix& d);

// ---- norms and distances -----------------------------------------------------

/// ‖P‖_a = max_{Δ≠0} ‖ΔP − PΔ‖_F / ‖Δ‖_F = λ_max(P) − λ_min(P).
double commutator_pseudonorm(const SymMatrix& p);

double bw_distance(const SpdMatrix& p0, const SpdMatrix& p1);
double fr_distance(const SpdMatrix& p0, const SpdMatrix& p1);

/// T·P·T' for SPD P.
SpdMatrix congruence(const Matrix& t, const SpdMatrix& p);

void require_same_dim(Index a, Index b, const char* what);

}  // namespace covpath
