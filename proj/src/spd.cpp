#include "covpath/spd.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "covpath/error.hpp"

namespace covpath {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

// Divided difference (log a − log b)/(a − b), accurate for close a, b.
double log_divided_difference(double a, double b, double scale) {
  const double gap = a - b;
  if (std::abs(gap) < kDegenerateGap * scale) return 2.0 / (a + b);
  return std::log1p(gap / b) / gap;
}

}  // namespace

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

// ---- SymMatrix ---------------------------------------------------------------

SymMatrix::SymMatrix(const Matrix& m) {
  require_square(m, "SymMatrix");
  if (!m.allFinite()) throw NotSymmetricError("SymMatrix: non-finite entries");
  const double asym = (m - m.transpose()).norm();
  if (asym > kSymTol * m.norm()) {
    std::ostringstream os;
    os << "SymMatrix: asymmetry " << asym << " exceeds tolerance " << kSymTol * m.norm();
    throw NotSymmetricError(os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix symmetric_part(const Matrix& m) {
  require_square(m, "symmetric_part");
  return SymMatrix(0.5 * (m + m.transpose()), SymMatrix::Trusted{});
}

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(Matrix::Zero(n, n), Trusted{}); }
SymMatrix SymMatrix::identity(Index n) { return SymMatrix(Matrix::Identity(n, n), Trusted{}); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  require_same_dim(dim(), o.dim(), "SymMatrix::operator+");
  return SymMatrix(m_ + o.m_, Trusted{});
}
SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  require_same_dim(dim(), o.dim(), "SymMatrix::operator-");
  return SymMatrix(m_ - o.m_, Trusted{});
}
SymMatrix SymMatrix::operator-() const { return SymMatrix(-m_, Trusted{}); }
SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(s * m_, Trusted{}); }

SkewMatrix SkewMatrix::skew_part(const Matrix& m) {
  require_square(m, "SkewMatrix");
  Matrix k = 0.5 * (m - m.transpose());
  k.diagonal().setZero();
  return SkewMatrix(std::move(k));
}

// ---- SpdMatrix ---------------------------------------------------------------

SpdMatrix::SpdMatrix(const Matrix& m) : SpdMatrix(SymMatrix(m)) {}

SpdMatrix::SpdMatrix(const SymMatrix& s) : m_(s.mat()) { decompose(); }

void SpdMatrix::decompose() {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
  if (es.info() != Eigen::Success) throw NotPositiveDefiniteError("SpdMatrix: eigensolver failed");
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  const double lmax = evals_(evals_.size() - 1);
  const double lmin = evals_(0);
  if (!(lmax > 0.0) || !(lmin > kSpdTol * lmax)) {
    std::ostringstream os;
    os << "SpdMatrix: not positive definite (lambda_min = " << lmin << ", lambda_max = " << lmax
       << ")";
    throw NotPositiveDefiniteError(os.str());
  }
}

SpdMatrix SpdMatrix::identity(Index n) { return SpdMatrix(SymMatrix::identity(n)); }

SpdMatrix SpdMatrix::diagonal(const Vector& d) {
  return SpdMatrix(Matrix(d.asDiagonal()));
}

SymMatrix SpdMatrix::sym() const { return symmetric_part(m_); }

Matrix SpdMatrix::spectral(const std::function<double(double)>& f) const {
  Vector fv = evals_.unaryExpr(f);
  return evecs_ * fv.asDiagonal() * evecs_.transpose();
}

SymEigen sym_eigen(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.mat());
  return {es.eigenvalues(), es.eigenvectors()};
}

// ---- spectral functions --------------------------------------------------------

SpdMatrix spd_sqrt(const SpdMatrix& p) {
  return SpdMatrix(symmetric_part(p.spectral([](double l) { return std::sqrt(l); })));
}

SpdMatrix spd_inv_sqrt(const SpdMatrix& p) {
  return SpdMatrix(symmetric_part(p.spectral([](double l) { return 1.0 / std::sqrt(l); })));
}

SpdMatrix spd_inverse(const SpdMatrix& p) {
  return SpdMatrix(symmetric_part(p.spectral([](double l) { return 1.0 / l; })));
}

SymMatrix spd_log(const SpdMatrix& p) {
  return symmetric_part(p.spectral([](double l) { return std::log(l); }));
}

SpdMatrix spd_exp(const SymMatrix& s) {
  const SymEigen e = sym_eigen(s);
  Vector ex = e.values.array().exp();
  return SpdMatrix(symmetric_part(e.vectors * ex.asDiagonal() * e.vectors.transpose()));
}

SpdMatrix spd_power(const SpdMatrix& p, double t) {
  if (t == 0.0) return SpdMatrix::identity(p.dim());
  if (t == 1.0) return p;
  return SpdMatrix(symmetric_part(p.spectral([t](double l) { return std::pow(l, t); })));
}

Matrix expm(const Matrix& a) {
  require_square(a, "expm");
  return a.exp();
}

Matrix expm_skew(const SkewMatrix& k) {
  const Index n = k.dim();
  if (n == 0) return Matrix();
  if (k.mat().isZero(0.0)) return Matrix::Identity(n, n);
  // iK is Hermitian: iK = V diag(mu) V*, so exp(K) = V diag(e^{-i mu}) V*.
  using Complex = std::complex<double>;
  const Eigen::MatrixXcd h = Complex(0.0, 1.0) * k.mat().cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd phase(n);
  for (Index i = 0; i < n; ++i) phase(i) = std::exp(Complex(0.0, -es.eigenvalues()(i)));
  const Eigen::MatrixXcd r = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  return r.real();
}

// ---- Fréchet operators ---------------------------------------------------------

Matrix frechet_mult(const Matrix& generator, const Matrix& d) {
  require_square(generator, "frechet_mult");
  require_same_dim(generator.rows(), d.rows(), "frechet_mult");
  require_same_dim(generator.cols(), d.cols(), "frechet_mult");
  const Index n = generator.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = generator;
  block.bottomRightCorner(n, n) = generator;
  block.topRightCorner(n, n) = d;
  const Matrix e = block.exp();
  return e.topRightCorner(n, n);
}

SymMatrix frechet_mult_spd(const SpdMatrix& x, const SymMatrix& d) {
  require_same_dim(x.dim(), d.dim(), "frechet_mult_spd");
  const Matrix& v = x.eigenvectors();
  const Vector& l = x.eigenvalues();
  const double scale = x.lambda_max();
  Matrix dt = v.transpose() * d.mat() * v;
  for (Index i = 0; i < dt.rows(); ++i)
    for (Index j = 0; j < dt.cols(); ++j) dt(i, j) /= log_divided_difference(l(i), l(j), scale);
  return symmetric_part(v * dt * v.transpose());
}

SymMatrix frechet_logdiv(const SpdMatrix& x, const SymMatrix& d) {
  require_same_dim(x.dim(), d.dim(), "frechet_logdiv");
  const Matrix& v = x.eigenvectors();
  const Vector& l = x.eigenvalues();
  const double scale = x.lambda_max();
  Matrix dt = v.transpose() * d.mat() * v;
  for (Index i = 0; i < dt.rows(); ++i)
    for (Index j = 0; j < dt.cols(); ++j) dt(i, j) *= log_divided_difference(l(i), l(j), scale);
  return symmetric_part(v * dt * v.transpose());
}

// ---- norms and distances -----------------------------------------------------

double commutator_pseudonorm(const SymMatrix& p) {
  const SymEigen e = sym_eigen(p);
  return e.values(e.values.size() - 1) - e.values(0);
}

SpdMatrix congruence(const Matrix& t, const SpdMatrix& p) {
  require_same_dim(t.cols(), p.dim(), "congruence");
  return SpdMatrix(symmetric_part(t * p.mat() * t.transpose()));
}

double bw_distance(const SpdMatrix& p0, const SpdMatrix& p1) {
  require_same_dim(p0.dim(), p1.dim(), "bw_distance");
  const SpdMatrix r0 = spd_sqrt(p0);
  const SpdMatrix r0inv = spd_inv_sqrt(p0);
  const SpdMatrix s = spd_sqrt(congruence(r0.mat(), p1));
  // P1^{1/2}·Û = P0^{-1/2}·(P0^{1/2} P1 P0^{1/2})^{1/2}
  return (r0.mat() - r0inv.mat() * s.mat()).norm();
}

double fr_distance(const SpdMatrix& p0, const SpdMatrix& p1) {
  require_same_dim(p0.dim(), p1.dim(), "fr_distance");
  const SpdMatrix m = congruence(spd_inv_sqrt(p0).mat(), p1);
  return m.eigenvalues().array().log().matrix().norm();
}

}  // namespace covpath
