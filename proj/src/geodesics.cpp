#include "covpath/geodesics.hpp"

#include <cmath>

#include "covpath/error.hpp"

namespace covpath {

Matrix GeodesicOmt::at(double t) const {
  const Index n = p0.dim();
  const Matrix m = Matrix::Identity(n, n) - t * q;
  const Matrix p = m * p0.mat() * m.transpose();
  return 0.5 * (p + p.transpose());
}

GeneralMatrix GeodesicOmt::steering(double t) const {
  const Index n = p0.dim();
  const Matrix m = t * q - Matrix::Identity(n, n);
  Eigen::PartialPivLU<Matrix> lu(m);
  if (!(lu.rcond() > 1e-14)) throw DegenerateParameterError("omt_steering: tQ - I is singular");
  return q * lu.inverse();
}

GeneralMatrix omt_steering(const GeodesicOmt& g, double t) { return g.steering(t); }

GeodesicOmt omt_geodesic(const SpdMatrix& p0, const SpdMatrix& p1) {
  require_same_dim(p0.dim(), p1.dim(), "omt_geodesic");
  const Index n = p0.dim();
  const SpdMatrix r0 = spd_sqrt(p0);
  const SpdMatrix r0inv = spd_inv_sqrt(p0);
  const SpdMatrix s = spd_sqrt(congruence(r0.mat(), p1));
  const Matrix q = Matrix::Identity(n, n) - r0inv.mat() * s.mat() * r0inv.mat();
  return {p0, symmetric_part(q).mat()};
}

GeodesicOmt omt_geodesic_weighted(const SpdMatrix& p0, const SpdMatrix& p1, const SpdMatrix& w) {
  require_same_dim(p0.dim(), w.dim(), "omt_geodesic_weighted");
  const SpdMatrix wh = spd_sqrt(w);
  const SpdMatrix whinv = spd_inv_sqrt(w);
  const GeodesicOmt inner = omt_geodesic(congruence(wh.mat(), p0), congruence(wh.mat(), p1));
  return {p0, whinv.mat() * inner.q * wh.mat()};
}

Matrix GeodesicInfo::at(double t) const {
  const Matrix e = expm(t * a);
  const Matrix p = e * p0.mat() * e.transpose();
  return 0.5 * (p + p.transpose());
}

GeodesicInfo info_geodesic(const SpdMatrix& p0, const SpdMatrix& p1) {
  require_same_dim(p0.dim(), p1.dim(), "info_geodesic");
  const SpdMatrix r0 = spd_sqrt(p0);
  const SpdMatrix r0inv = spd_inv_sqrt(p0);
  const SymMatrix l = spd_log(congruence(r0inv.mat(), p1));
  return {p0, 0.5 * r0.mat() * l.mat() * r0inv.mat()};
}

bool omt_feasible(const GeneralMatrix& q) {
  const Index n = q.rows();
  constexpr int kGrid = 33;
  for (int k = 0; k < kGrid; ++k) {
    const double t = static_cast<double>(k) / (kGrid - 1);
    const Matrix m = Matrix::Identity(n, n) - t * q;
    const double root = std::pow(std::abs(m.determinant()), 1.0 / static_cast<double>(n));
    if (!(root > 0.0 && root >= 1e-6 * m.norm())) return false;
  }
  return true;
}

// ---- running costs -----------------------------------------------------------

double cost_f(const Matrix& p, const GeneralMatrix& a) { return (a * p * a.transpose()).trace(); }

double cost_fW(const Matrix& w, const Matrix& p, const GeneralMatrix& a) {
  return (w * a * p * a.transpose()).trace();
}

double cost_info1(const Matrix& p, const GeneralMatrix& a) {
  Eigen::LLT<Matrix> llt(p);
  const Matrix pinv_apat = llt.solve(a * p * a.transpose());
  return 2.0 * ((a * a).trace() + pinv_apat.trace());
}

double cost_info2(const Matrix& p, const GeneralMatrix& a) {
  Eigen::LLT<Matrix> llt(p);
  return 4.0 * llt.solve(a * p * a.transpose()).trace();
}

double cost_eps(double eps, const GeneralMatrix& a) {
  const Matrix as = 0.5 * (a + a.transpose());
  const Matrix aa = 0.5 * (a - a.transpose());
  return as.squaredNorm() + eps * aa.squaredNorm();
}

double running_cost(const CostSelector& sel, const Matrix& p, const GeneralMatrix& a) {
  switch (sel.kind) {
    case CostKind::f:
      return cost_f(p, a);
    case CostKind::f_weighted:
      return cost_fW(sel.weight, p, a);
    case CostKind::info1:
      return cost_info1(p, a);
    case CostKind::info2:
      return cost_info2(p, a);
    case CostKind::eps:
      return cost_eps(sel.eps, a);
  }
  return 0.0;
}

}  // namespace covpath
