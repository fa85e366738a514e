#include "covpath/wls.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "covpath/error.hpp"
#include "covpath/kernels.hpp"
#include "covpath/sym_basis.hpp"

namespace covpath {

double alpha_from_eps(double eps) {
  if (eps == 0.0 || !std::isfinite(eps)) throw DegenerateParameterError("alpha_from_eps: eps must be finite and nonzero");
  return (1.0 + eps) / (2.0 * eps);
}

double eps_from_alpha(double alpha) {
  if (alpha == 0.5 || !std::isfinite(alpha)) throw DegenerateParameterError("eps_from_alpha: alpha = 1/2 has no finite eps");
  return 1.0 / (2.0 * alpha - 1.0);
}

GeneralMatrix transition(const GeneralMatrix& a, double eps, double t) {
  const SkewMatrix aa = SkewMatrix::skew_part(a);
  const Matrix as = 0.5 * (a + a.transpose());
  const Matrix rotation = expm_skew(SkewMatrix::skew_part((1.0 + eps) * t * aa.mat()));
  const Matrix stretch = expm(t * (as - eps * aa.mat()));
  return rotation * stretch;
}

// ---- WlsModel --------------------------------------------------------------------

Matrix WlsModel::at(double t) const {
  const Matrix tr = transition(a0, eps, t);
  const Matrix p = tr * p0.mat() * tr.transpose();
  return 0.5 * (p + p.transpose());
}

GeneralMatrix WlsModel::steering(double t) const {
  const Matrix r = expm_skew(SkewMatrix::skew_part((1.0 + eps) * t * a0));
  return r * a0 * r.transpose();
}

SymMatrix WlsModel::a_sym() const { return symmetric_part(a0); }
SkewMatrix WlsModel::a_skew() const { return SkewMatrix::skew_part(a0); }

double WlsModel::running_cost() const {
  return a_sym().mat().squaredNorm() + eps * a_skew().mat().squaredNorm();
}

SpdMatrix wls_eval(const WlsModel& m, double t) { return SpdMatrix(symmetric_part(m.at(t))); }
GeneralMatrix wls_steering(const WlsModel& m, double t) { return m.steering(t); }

GeneralMatrix steering_from_costate(const SpdMatrix& p0, const SymMatrix& pi, double eps) {
  require_same_dim(p0.dim(), pi.dim(), "steering_from_costate");
  const Matrix p0pi = p0.mat() * pi.mat();
  const Matrix pip0 = pi.mat() * p0.mat();
  return -0.5 * (p0pi + pip0) - (0.5 / eps) * (pip0 - p0pi);
}

SymMatrix costate_at(const WlsModel& m, const SymMatrix& pi0, double t) {
  const Matrix as = m.a_sym().mat();
  const Matrix aa = m.a_skew().mat();
  const Matrix r = expm_skew(SkewMatrix::skew_part((1.0 + m.eps) * t * aa));
  // (−A_s + εA_a')t = −(A_s + εA_a)t
  const Matrix e = expm(-t * (as + m.eps * aa));
  return symmetric_part(r * e * pi0.mat() * e.transpose() * r.transpose());
}

// ---- endpoint map ----------------------------------------------------------------

SpdMatrix h_map(const SpdMatrix& p0, const SymMatrix& pi, double alpha) {
  require_same_dim(p0.dim(), pi.dim(), "h_map");
  const SpdMatrix half = spd_sqrt(p0);
  // e^{−P0Π} P0 e^{−ΠP0} = P0^{1/2} e^{−2 P0^{1/2} Π P0^{1/2}} P0^{1/2}
  const SpdMatrix inner =
      spd_exp(symmetric_part(-2.0 * half.mat() * pi.mat() * half.mat()));
  const Matrix m = half.mat() * inner.mat() * half.mat();
  const Matrix u = expm_skew(SkewMatrix::skew_part(alpha * (pi.mat() * p0.mat() - p0.mat() * pi.mat())));
  return SpdMatrix(symmetric_part(u.transpose() * m * u));
}

SymMatrix pi_seed(const SpdMatrix& p0, const SpdMatrix& p1) {
  require_same_dim(p0.dim(), p1.dim(), "pi_seed");
  const SpdMatrix inv_half = spd_inv_sqrt(p0);
  const SymMatrix l = spd_log(congruence(inv_half.mat(), p1));
  return symmetric_part(-0.5 * inv_half.mat() * l.mat() * inv_half.mat());
}

SymMatrix fixed_point_rhs(const SpdMatrix& p0, const SpdMatrix& p1, const SymMatrix& pi,
                          double alpha) {
  const SpdMatrix inv_half = spd_inv_sqrt(p0);
  const Matrix u = expm_skew(SkewMatrix::skew_part(alpha * (pi.mat() * p0.mat() - p0.mat() * pi.mat())));
  const SpdMatrix rotated = congruence(u, p1);
  const SymMatrix l = spd_log(congruence(inv_half.mat(), rotated));
  return symmetric_part(-0.5 * inv_half.mat() * l.mat() * inv_half.mat());
}

// ---- linearization -----------------------------------------------------------------

SymMatrix SymLinearOperator::apply(const SymMatrix& d) const {
  return sym_unvec(array * sym_vec(d.mat()), n);
}

double SymLinearOperator::norm() const {
  Eigen::JacobiSVD<Matrix> svd(array);
  return svd.singularValues()(0);
}

HhatContext::HhatContext(const SpdMatrix& p0, const SymMatrix& pi, double alpha)
    : p0_(p0), alpha_(alpha) {
  require_same_dim(p0.dim(), pi.dim(), "HhatContext");
  const SpdMatrix half = spd_sqrt(p0);
  p0_half_ = half.mat();
  p0_inv_half_ = spd_inv_sqrt(p0).mat();
  generator_ = SkewMatrix::skew_part(alpha * (pi.mat() * p0.mat() - p0.mat() * pi.mat())).mat();
  u_ = expm_skew(SkewMatrix::skew_part(generator_));
  q_ = spd_exp(symmetric_part(-2.0 * p0_half_ * pi.mat() * p0_half_));
  p1hat_ = SpdMatrix(symmetric_part(u_.transpose() * p0_half_ * q_.mat() * p0_half_ * u_));
}

SymMatrix HhatContext::apply(const SymMatrix& d) const {
  const Matrix c = d.mat() * p0_.mat() - p0_.mat() * d.mat();
  const Matrix mu = frechet_mult(generator_, c);
  // The second term of ĥ is the transpose of the first.
  const Matrix x = p0_inv_half_ * mu * p1hat_.mat() * u_.transpose() * p0_inv_half_;
  const SymMatrix arg = symmetric_part(2.0 * x);  // x + x'
  const SymMatrix l = frechet_logdiv(q_, arg);
  return symmetric_part(-0.5 * p0_inv_half_ * l.mat() * p0_inv_half_);
}

SymMatrix HhatContext::endpoint_to_costate(const SymMatrix& dp) const {
  const SymMatrix arg = symmetric_part(p0_inv_half_ * u_ * dp.mat() * u_.transpose() * p0_inv_half_);
  const SymMatrix l = frechet_logdiv(q_, arg);
  return symmetric_part(-0.5 * p0_inv_half_ * l.mat() * p0_inv_half_);
}

SymMatrix HhatContext::costate_to_endpoint(const SymMatrix& dpi) const {
  const SymMatrix z = frechet_mult_spd(q_, symmetric_part(-2.0 * p0_half_ * dpi.mat() * p0_half_));
  return symmetric_part(u_.transpose() * p0_half_ * z.mat() * p0_half_ * u_);
}

SymMatrix HhatContext::h_derivative(const SymMatrix& d) const {
  return costate_to_endpoint(d - alpha_ * apply(d));
}

SymLinearOperator hhat_operator(const SpdMatrix& p0, const SymMatrix& pi, double alpha, Exec exec) {
  const HhatContext ctx(p0, pi, alpha);
  const Index n = p0.dim();
  const Index m = sym_dim(n);
  SymLinearOperator op;
  op.n = n;
  op.array = kernels::assemble_columns(
      m, m, [&](Index k) { return sym_vec(ctx.apply(sym_basis(n, k)).mat()); }, exec);
  return op;
}

Matrix h_jacobian(const SpdMatrix& p0, const SymMatrix& pi, double alpha, Exec exec) {
  const HhatContext ctx(p0, pi, alpha);
  const Index n = p0.dim();
  const Index m = sym_dim(n);
  return kernels::assemble_columns(
      m, m, [&](Index k) { return sym_vec(ctx.h_derivative(sym_basis(n, k)).mat()); }, exec);
}

// ---- solvers ---------------------------------------------------------------------------

WlsSolution make_solution(const SpdMatrix& p0, const SpdMatrix& p1, const SymMatrix& pi,
                          double alpha, std::string branch, int iterations) {
  const double eps = eps_from_alpha(alpha);
  WlsSolution s;
  s.model = WlsModel{p0, steering_from_costate(p0, pi, eps), eps};
  s.pi = pi;
  s.alpha = alpha;
  s.residual = (h_map(p0, pi, alpha).mat() - p1.mat()).norm();
  s.cost = s.model.running_cost();
  s.branch = std::move(branch);
  s.iterations = iterations;
  return s;
}

namespace {

// Residual of h_α(Π) = P1, or +inf when h cannot be evaluated.
double endpoint_residual(const SpdMatrix& p0, const SpdMatrix& p1, const SymMatrix& pi, double alpha) {
  try {
    const double r = (h_map(p0, pi, alpha).mat() - p1.mat()).norm();
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

WlsSolution solve_local(const SpdMatrix& p0, const SpdMatrix& p1, double alpha,
                        const SymMatrix& init, const LocalOptions& opts) {
  require_same_dim(p0.dim(), p1.dim(), "solve_local");
  require_same_dim(p0.dim(), init.dim(), "solve_local");
  eps_from_alpha(alpha);  // rejects the pole
  const Index n = p0.dim();
  const double tol = opts.tol_rel * p1.mat().norm();

  SymMatrix pi = init;
  double res = endpoint_residual(p0, p1, pi, alpha);
  if (!std::isfinite(res)) throw DegenerateParameterError("solve_local: initial guess is not evaluable");

  int polish = 0;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (res <= tol) {
      // A couple of extra Newton steps take converged iterates to round-off.
      if (res == 0.0 || polish >= 2) break;
      ++polish;
    }
    const Vector r = sym_vec(h_map(p0, pi, alpha).mat() - p1.mat());
    const Matrix jac = h_jacobian(p0, pi, alpha, opts.exec);
    const Vector step = jac.completeOrthogonalDecomposition().solve(-r);

    double scale = 1.0;
    bool accepted = false;
    for (int b = 0; b <= opts.max_backtracks; ++b, scale *= 0.5) {
      const SymMatrix trial = pi + sym_unvec(scale * step, n);
      const double trial_res = endpoint_residual(p0, p1, trial, alpha);
      if (trial_res < res) {
        pi = trial;
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (res <= tol) break;
      std::ostringstream os;
      os << "solve_local: line search stagnated at residual " << res << " (tolerance " << tol << ")";
      throw StagnationError(os.str(), pi.mat(), res);
    }
  }
  if (res > tol) {
    std::ostringstream os;
    os << "solve_local: no convergence after " << it << " iterations, residual " << res;
    throw NonConvergenceError(os.str(), pi.mat(), res);
  }
  return make_solution(p0, p1, pi, alpha, opts.branch, it);
}

WlsSolution solve_continuation(const SpdMatrix& p0, const SpdMatrix& p1, double alpha,
                               const ContinuationOptions& opts) {
  require_same_dim(p0.dim(), p1.dim(), "solve_continuation");
  if (opts.steps < 1) throw Error("solve_continuation: steps must be positive");
  const double bound = existence_bound(p0, p1);
  if (!(std::abs(alpha) < bound) && !opts.override_bound) {
    std::ostringstream os;
    os << "solve_continuation: |alpha| = " << std::abs(alpha) << " is not below the existence bound "
       << bound << " (override to proceed)";
    throw DegenerateParameterError(os.str());
  }
  const Index n = p0.dim();
  const Index m = sym_dim(n);
  const SymMatrix seed = pi_seed(p0, p1);
  if (alpha == 0.0) return make_solution(p0, p1, seed, alpha, "continuation", 0);

  auto rhs = [&](double tau, const Vector& x) -> Vector {
    const SymMatrix pi = sym_unvec(x, n);
    const SymLinearOperator h = hhat_operator(p0, pi, alpha * tau, opts.exec);
    const Matrix lhs = Matrix::Identity(m, m) - alpha * tau * h.array;
    Eigen::JacobiSVD<Matrix> svd(lhs);
    const Vector& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond <= opts.max_condition)) {
      std::ostringstream os;
      os << "solve_continuation: I - alpha_tau*hhat is numerically singular (condition " << cond
         << ") at tau = " << tau;
      throw ContinuationBreakdownError(os.str(), tau);
    }
    return lhs.partialPivLu().solve(alpha * (h.array * x));
  };

  Vector x = sym_vec(seed.mat());
  const double h = 1.0 / opts.steps;
  for (int k = 0; k < opts.steps; ++k) {
    const double tau = k * h;
    const Vector k1 = rhs(tau, x);
    const Vector k2 = rhs(tau + 0.5 * h, x + 0.5 * h * k1);
    const Vector k3 = rhs(tau + 0.5 * h, x + 0.5 * h * k2);
    const Vector k4 = rhs(tau + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  const SymMatrix integrated = sym_unvec(x, n);
  const double tol = opts.tol_rel * p1.mat().norm();
  LocalOptions local;
  local.branch = "continuation";
  local.exec = opts.exec;
  try {
    WlsSolution s = solve_local(p0, p1, alpha, integrated, local);
    s.iterations += opts.steps;
    return s;
  } catch (const NonConvergenceError& e) {
    if (e.residual() <= tol)
      return make_solution(p0, p1, SymMatrix(e.best_iterate()), alpha, "continuation", opts.steps);
    std::ostringstream os;
    os << "solve_continuation: refinement failed: " << e.what();
    throw NonConvergenceError(os.str(), e.best_iterate(), e.residual());
  }
}

std::vector<double> geometric_grid(double eps_start, double eps_target, int count) {
  if (!(eps_start > 0.0) || !(eps_target > 0.0)) throw DegenerateParameterError("geometric_grid: endpoints must be positive");
  if (count < 1) throw Error("geometric_grid: count must be positive");
  if (count == 1) return {eps_target};
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double ratio = std::log(eps_target / eps_start);
  for (int k = 0; k < count; ++k)
    grid[static_cast<std::size_t>(k)] = eps_start * std::exp(ratio * k / (count - 1));
  grid.front() = eps_start;
  grid.back() = eps_target;
  return grid;
}

std::vector<WlsSolution> solve_homotopy(const SpdMatrix& p0, const SpdMatrix& p1,
                                        std::span<const double> eps_grid, const SymMatrix& init,
                                        const LocalOptions& opts) {
  std::vector<WlsSolution> out;
  out.reserve(eps_grid.size());
  SymMatrix current = init;
  for (const double eps : eps_grid) {
    out.push_back(solve_local(p0, p1, alpha_from_eps(eps), current, opts));
    current = out.back().pi;
  }
  return out;
}

WlsSolution time_reversed(const WlsSolution& reversed, const SpdMatrix& p0) {
  const SymMatrix pi_end = costate_at(reversed.model, reversed.pi, 1.0);
  return make_solution(p0, reversed.model.p0, -pi_end, reversed.alpha,
                       "reversed:" + reversed.branch, reversed.iterations);
}

double existence_bound(const SpdMatrix& p0, const SpdMatrix& p1) {
  require_same_dim(p0.dim(), p1.dim(), "existence_bound");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double num = p0.lambda_min() * p1.lambda_min();
  // Spreads at round-off level count as zero (scalar multiples of I).
  auto ratio = [&](const SpdMatrix& a, const SpdMatrix& b) {
    const double spread = a.lambda_max() - a.lambda_min();
    if (spread <= 8.0 * std::numeric_limits<double>::epsilon() * a.lambda_max()) return kInf;
    return num / (spread * b.lambda_max());
  };
  return std::max(ratio(p0, p1), ratio(p1, p0));
}

double wls_cost_upper_bound(const SpdMatrix& p0, const SpdMatrix& p1) {
  require_same_dim(p0.dim(), p1.dim(), "wls_cost_upper_bound");
  const SpdMatrix half = spd_sqrt(p0);
  const SpdMatrix inv_half = spd_inv_sqrt(p0);
  const SpdMatrix s = spd_sqrt(congruence(half.mat(), p1));
  const SpdMatrix m = congruence(inv_half.mat(), s);
  return m.eigenvalues().array().log().square().sum();
}

}  // namespace covpath
