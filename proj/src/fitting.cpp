#include "covpath/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "covpath/error.hpp"
#include "covpath/kernels.hpp"
#include "covpath/random.hpp"
#include "covpath/sym_basis.hpp"

namespace covpath {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieBand = 1e-15;
constexpr double kRepairFloor = 1e-8;

double softplus(double r) { return r > 30.0 ? r : std::log1p(std::exp(r)); }
double softplus_inv(double d) { return d > 30.0 ? d : d + std::log(-std::expm1(-d)); }

struct StartOutcome {
  Vector x;
  double f = kInf;
  int iterations = 0;
  bool converged = false;
  bool stagnated = false;
  std::vector<double> history;
};

struct Problem {
  Index n;
  Family family;
  double eps;
  std::vector<double> times;
  std::vector<Matrix> targets;
  double scale;  // Σ‖P̃_k‖²

  double operator()(const Vector& x) const {
    try {
      const double f = fit_objective(decode_params(x, n, family, eps), times, targets);
      return std::isfinite(f) ? f : kInf;
    } catch (const Error&) {
      return kInf;
    }
  }
};

// BFGS on the inverse Hessian with Armijo backtracking. Accepted steps
// strictly decrease f.
StartOutcome bfgs(const Problem& prob, Vector x, const FitOptions& opts, Exec grad_exec) {
  StartOutcome out;
  const Index p = x.size();
  double f = prob(x);
  if (!std::isfinite(f)) {
    out.x = x;
    out.stagnated = true;
    return out;
  }
  auto gradient = [&](const Vector& at) { return kernels::fd_gradient(prob, at, opts.fd_step, grad_exec); };
  Vector g = gradient(x);
  Matrix h = Matrix::Identity(p, p);
  bool scaled = false;
  const double gtol = opts.gtol * std::max(prob.scale, 1e-300);

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (f == 0.0 || g.lpNorm<Eigen::Infinity>() <= gtol) {
      out.converged = true;
      break;
    }
    Vector d = -h * g;
    if (!(g.dot(d) < 0.0)) {
      h.setIdentity();
      d = -g;
    }
    const double slope = g.dot(d);
    double step = 1.0;
    double f_new = kInf;
    Vector x_new;
    bool accepted = false;
    for (int b = 0; b < 60; ++b, step *= 0.5) {
      x_new = x + step * d;
      f_new = prob(x_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope && f_new < f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Nothing left to gain at gradient-noise level counts as converged.
      const double noise = 1e-6 * std::max(f, 1e-12 * prob.scale);
      out.converged = g.lpNorm<Eigen::Infinity>() <= std::max(noise, gtol * 1e3);
      out.stagnated = !out.converged;
      break;
    }
    const Vector g_new = gradient(x_new);
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector hy = h * y;
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
    x = x_new;
    f = f_new;
    g = g_new;
    out.history.push_back(f);
  }
  out.x = x;
  out.f = f;
  out.iterations = it;
  return out;
}

// Knots t_k = k/K within round-off.
bool uniform_grid(const std::vector<double>& t) {
  if (t.size() < 3) return false;
  const double last = static_cast<double>(t.size() - 1);
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::abs(t[k] - static_cast<double>(k) / last) > 1e-14) return false;
  return true;
}

// On uniform knots the exponentials e^{X t_k} are powers of e^{X/K}, which
// replaces two matrix exponentials per knot by two matrix products.
double uniform_objective(const PathModel& m, const std::vector<Matrix>& targets) {
  const Index n = model_dim(m);
  const double h = 1.0 / static_cast<double>(targets.size() - 1);
  const Matrix& p0 = model_p0(m).mat();
  Matrix rot_step = Matrix::Identity(n, n);
  Matrix stretch_step;
  if (const auto* w = std::get_if<WlsModel>(&m)) {
    const Matrix aa = w->a_skew().mat();
    rot_step = expm_skew(SkewMatrix::skew_part((1.0 + w->eps) * h * aa));
    stretch_step = expm(h * (w->a_sym().mat() - w->eps * aa));
  } else {
    stretch_step = expm(h * std::get<GeodesicInfo>(m).a);
  }
  Matrix rot = Matrix::Identity(n, n);
  Matrix stretch = Matrix::Identity(n, n);
  double f = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (k > 0) {
      rot = rot * rot_step;
      stretch = stretch * stretch_step;
    }
    const Matrix t = rot * stretch;
    const Matrix p = t * p0 * t.transpose();
    f += (0.5 * (p + p.transpose()) - targets[k]).squaredNorm();
  }
  return f;
}

FitResult make_result(const Problem& prob, const StartOutcome& o, int index) {
  FitResult r;
  r.family = prob.family;
  r.params = decode_params(o.x, prob.n, prob.family, prob.eps);
  r.eps = prob.family == Family::wls ? prob.eps : 0.0;
  r.objective = o.f;
  r.normalized_error = o.f / prob.scale;
  r.iterations = o.iterations;
  r.converged = o.converged;
  r.multistart_index = index;
  r.history = o.history;
  r.times = prob.times;
  return r;
}

Problem make_problem(const CovSequence& seq, Family family, double eps) {
  seq.validate();
  if (family == Family::wls && !(eps > 0.0))
    throw DegenerateParameterError("fit: wls requires eps > 0");
  Problem prob{seq.dim(), family, eps, normalized_times(seq), {}, 0.0};
  for (const Matrix& m : seq.matrices) {
    prob.targets.push_back(psd_repair(m).mat());
    prob.scale += prob.targets.back().squaredNorm();
  }
  return prob;
}

FitResult fit_with_starts(const CovSequence& seq, Family family, double eps, const FitOptions& opts,
                          const std::vector<Vector>& extra_starts) {
  const Problem prob = make_problem(seq, family, eps);

  if (seq.size() == 1) {
    StartOutcome o;
    o.x = encode_params(SpdMatrix(prob.targets.front()), Matrix::Zero(prob.n, prob.n));
    o.f = prob(o.x);
    o.converged = true;
    return make_result(prob, o, 0);
  }

  const int cold = std::max(1, opts.multistart);
  std::vector<Vector> starts;
  for (int k = 0; k < cold; ++k) starts.push_back(multistart_guess(seq, family, k, opts.seed));
  for (const Vector& x : extra_starts) starts.push_back(x);

  const auto count = static_cast<Index>(starts.size());
  const Exec outer = count > 1 ? opts.exec : Exec::serial;
  const Exec inner = count > 1 ? Exec::serial : opts.exec;
  std::vector<StartOutcome> outcomes(starts.size());
  kernels::for_each_index(
      count, [&](Index k) { outcomes[static_cast<std::size_t>(k)] = bfgs(prob, starts[static_cast<std::size_t>(k)], opts, inner); },
      outer);

  // Deterministic merge: lowest objective, then lowest start index. Gaps at
  // round-off level relative to the data scale count as ties.
  std::size_t best = 0;
  for (std::size_t k = 1; k < outcomes.size(); ++k)
    if (outcomes[k].f < outcomes[best].f) best = k;
  const double band = outcomes[best].f + kTieBand * prob.scale;
  for (std::size_t k = 0; k < best; ++k)
    if (outcomes[k].f <= band) {
      best = k;
      break;
    }
  const bool all_stagnated = std::all_of(outcomes.begin(), outcomes.end(),
                                         [](const StartOutcome& o) { return o.stagnated; });
  if (all_stagnated || !std::isfinite(outcomes[best].f)) {
    std::ostringstream os;
    os << "fit: optimizer stagnated on all " << outcomes.size() << " starts (best objective "
       << outcomes[best].f << ")";
    throw NonConvergenceError(os.str(), outcomes[best].x, outcomes[best].f);
  }
  return make_result(prob, outcomes[best], static_cast<int>(best));
}

}  // namespace

void CovSequence::validate() const {
  if (matrices.empty()) throw DimensionError("covariance sequence is empty");
  if (times.size() != matrices.size())
    throw DimensionError("covariance sequence: times and matrices differ in count");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw DimensionError("covariance sequence: times must increase strictly");
  const Index n = matrices.front().rows();
  for (const Matrix& m : matrices) {
    if (m.rows() != n || m.cols() != n || n == 0)
      throw DimensionError("covariance sequence: matrices must be square of one dimension");
    if (!m.allFinite()) throw DimensionError("covariance sequence: non-finite entries");
  }
}

SpdMatrix psd_repair(const Matrix& m) {
  const SymEigen e = sym_eigen(SymMatrix(m));
  const double lmax = e.values.maxCoeff();
  if (!(lmax > 0.0)) throw NotPositiveDefiniteError("psd_repair: matrix has no positive eigenvalue");
  const Vector clipped = e.values.cwiseMax(kRepairFloor * lmax);
  return SpdMatrix(symmetric_part(e.vectors * clipped.asDiagonal() * e.vectors.transpose()));
}

std::vector<double> normalized_times(const CovSequence& seq) {
  std::vector<double> t(seq.times.size(), 0.0);
  if (t.size() < 2) return t;
  const double t0 = seq.times.front();
  const double span = seq.times.back() - t0;
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = (seq.times[k] - t0) / span;
  t.back() = 1.0;
  return t;
}

Index param_count(Index n) { return sym_dim(n) + n * n; }

Vector encode_params(const SpdMatrix& p0, const GeneralMatrix& m) {
  const Index n = p0.dim();
  const Matrix l = Eigen::LLT<Matrix>(p0.mat()).matrixL();
  Vector x(param_count(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) x(k++) = l(i, j);
    x(k++) = softplus_inv(l(i, i));
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) x(k++) = m(i, j);
  return x;
}

PathModel decode_params(const Vector& x, Index n, Family family, double eps) {
  if (x.size() != param_count(n)) throw DimensionError("decode_params: parameter count mismatch");
  Matrix l = Matrix::Zero(n, n);
  Matrix m(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) l(i, j) = x(k++);
    l(i, i) = softplus(x(k++));
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = x(k++);
  const SpdMatrix p0(symmetric_part(l * l.transpose()));
  switch (family) {
    case Family::omt:
      return GeodesicOmt{p0, m};
    case Family::info:
      return GeodesicInfo{p0, m};
    case Family::wls:
      return WlsModel{p0, m, eps};
  }
  throw DegenerateParameterError("decode_params: unknown family");
}

Vector initial_guess(const CovSequence& seq, Family /*family*/) {
  seq.validate();
  const Index n = seq.dim();
  return encode_params(psd_repair(seq.matrices.front()), Matrix::Zero(n, n));
}

Vector multistart_guess(const CovSequence& seq, Family family, int k, std::uint64_t seed) {
  Vector x = initial_guess(seq, family);
  if (k == 0) return x;
  const Index n = seq.dim();
  const SpdMatrix first = psd_repair(seq.matrices.front());
  const SpdMatrix last = psd_repair(seq.matrices.back());
  const double s = first.mat() == last.mat() ? 0.0 : 0.1 * fr_distance(first, last);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
  x.tail(n * n) += random_gaussian(1, n * n, rng, 1.0).transpose() * s;
  return x;
}

double fit_objective(const PathModel& m, const std::vector<double>& times,
                     const std::vector<Matrix>& targets) {
  if (const auto* g = std::get_if<GeodesicOmt>(&m))
    if (!omt_feasible(g->q)) return kInf;
  if (!std::holds_alternative<GeodesicOmt>(m) && uniform_grid(times)) return uniform_objective(m, targets);
  double f = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) f += (model_at(m, times[k]) - targets[k]).squaredNorm();
  return f;
}

FitResult fit(const CovSequence& seq, Family family, const FitOptions& opts) {
  return fit_with_starts(seq, family, opts.eps, opts, {});
}

EpsSearchResult fit_eps_search(const CovSequence& seq, std::span<const double> eps_grid,
                               const FitOptions& opts) {
  if (eps_grid.empty()) throw DegenerateParameterError("fit_eps_search: empty eps grid");
  for (double e : eps_grid)
    if (!(e > 0.0)) throw DegenerateParameterError("fit_eps_search: eps values must be positive");
  EpsSearchResult out;
  std::vector<Vector> warm;
  const int cold = std::max(1, opts.multistart);
  for (double e : eps_grid) {
    FitResult r = fit_with_starts(seq, Family::wls, e, opts, warm);
    out.table.push_back({e, r.objective, r.normalized_error, r.multistart_index,
                         r.multistart_index >= cold});
    warm = {encode_params(model_p0(r.params), model_param(r.params))};
    if (out.table.size() == 1 || r.objective < out.best.objective) out.best = std::move(r);
  }
  return out;
}

std::vector<double> log_grid(double a, double b, int steps) {
  if (!(a > 0.0) || !(b > 0.0) || steps < 1) throw DegenerateParameterError("log_grid: need a, b > 0 and steps >= 1");
  if (steps == 1) return {a};
  std::vector<double> g(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    // Snap to 12 significant digits so grids like 5:40:4 print as 5, 10, 20, 40.
    const double v = a * std::pow(b / a, static_cast<double>(k) / (steps - 1));
    const double q = std::pow(10.0, std::floor(std::log10(v)) - 11);
    g[static_cast<std::size_t>(k)] = std::round(v / q) * q;
  }
  g.front() = a;
  g.back() = b;
  return g;
}

std::vector<double> default_eps_grid() { return log_grid(0.1, 100.0, 16); }

}  // namespace covpath
