#include "covpath/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "covpath/error.hpp"
#include "covpath/quadrature.hpp"
#include "covpath/random.hpp"
#include "covpath/sym_basis.hpp"

namespace covpath {

namespace {

Matrix lyapunov_rhs(const GeneralMatrix& a, const Matrix& p) {
  const Matrix ap = a * p;
  return ap + ap.transpose();
}

double flow_defect(const Matrix& dp, const GeneralMatrix& a, const Matrix& p) {
  const double scale = p.norm() * std::max(1.0, a.norm());
  return (dp - lyapunov_rhs(a, p)).norm() / std::max(scale, 1e-300);
}

double rel_diff(const Matrix& x, const Matrix& ref) {
  return (x - ref).norm() / std::max(ref.norm(), 1e-300);
}

bool uniform_grid(const std::vector<double>& t) {
  if (t.size() < 2) return false;
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::abs(t[k] - (t.front() + h * static_cast<double>(k))) > 1e-12) return false;
  return true;
}

std::vector<double> check_times(const VerifyOptions& opts) {
  std::vector<double> times;
  for (int k = 0; k < opts.grid; ++k)
    times.push_back(static_cast<double>(k) / std::max(1, opts.grid - 1));
  Rng rng(opts.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < opts.random_times; ++k) times.push_back(uni(rng));
  return times;
}

void finish(VerifyReport& r, const VerifyOptions& opts, double cost_scale) {
  r.pass = r.r0 <= opts.tol && r.r1 <= opts.tol && r.flow_residual <= opts.tol &&
           r.cost_constancy <= opts.tol * std::max(1.0, cost_scale) &&
           r.sample_residual <= opts.tol;
  r.seed = opts.seed;
}

}  // namespace

void SampledPath::validate() const {
  if (times.size() != matrices.size() || times.size() < 2)
    throw DimensionError("sampled path: need at least two times with one matrix each");
  if (times.front() != 0.0 || times.back() != 1.0)
    throw DimensionError("sampled path: times must run from 0 to 1");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw DimensionError("sampled path: times must increase strictly");
  const Index n = matrices.front().rows();
  for (const Matrix& m : matrices) {
    require_same_dim(m.rows(), n, "sampled path");
    SpdMatrix check(m);
  }
}

SampledPath integrate_flow(const SpdMatrix& p0, const std::function<GeneralMatrix(double)>& steering,
                           int steps) {
  if (steps < 10) throw DegenerateParameterError("integrate_flow: steps must be at least 10");
  const double h = 1.0 / steps;
  SampledPath out;
  out.times.reserve(static_cast<std::size_t>(steps) + 1);
  out.matrices.reserve(static_cast<std::size_t>(steps) + 1);
  Matrix p = p0.mat();
  out.times.push_back(0.0);
  out.matrices.push_back(p);
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const GeneralMatrix a0 = steering(t);
    const GeneralMatrix ah = steering(t + 0.5 * h);
    const GeneralMatrix a1 = steering(t + h);
    const Matrix k1 = lyapunov_rhs(a0, p);
    const Matrix k2 = lyapunov_rhs(ah, p + 0.5 * h * k1);
    const Matrix k3 = lyapunov_rhs(ah, p + 0.5 * h * k2);
    const Matrix k4 = lyapunov_rhs(a1, p + h * k3);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    p = 0.5 * (p + p.transpose());
    const double t_next = (k + 1 == steps) ? 1.0 : (k + 1) * h;
    Eigen::LLT<Matrix> llt(p);
    if (llt.info() != Eigen::Success || !p.allFinite()) {
      std::ostringstream os;
      os << "integrate_flow: covariance lost positive definiteness at t = " << t_next;
      throw FlowError(os.str(), t_next);
    }
    out.times.push_back(t_next);
    out.matrices.push_back(p);
  }
  return out;
}

SteeredPath sample_model(const PathModel& m, int steps) {
  if (steps < 1) throw DegenerateParameterError("sample_model: steps must be positive");
  SteeredPath out;
  for (int k = 0; k <= steps; ++k) {
    const double t = (k == steps) ? 1.0 : static_cast<double>(k) / steps;
    out.path.times.push_back(t);
    out.path.matrices.push_back(model_at(m, t));
    out.steering.push_back(model_steering(m, t));
  }
  return out;
}

SteeredPath perturbed_feasible_path(const SpdMatrix& p0, const SpdMatrix& p1, std::uint64_t seed,
                                    BaseFamily base, int steps, double scale) {
  require_same_dim(p0.dim(), p1.dim(), "perturbed_feasible_path");
  if (steps < 2) throw DegenerateParameterError("perturbed_feasible_path: steps must be at least 2");
  const Index n = p0.dim();
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double magnitude = scale * uni(rng) / std::sqrt(static_cast<double>(sym_dim(n)));
  const Matrix b = random_symmetric(n, rng, magnitude).mat();

  const GeodesicInfo info = info_geodesic(p0, p1);
  const GeodesicOmt omt = omt_geodesic(p0, p1);
  const Matrix eye = Matrix::Identity(n, n);

  SteeredPath out;
  for (int k = 0; k <= steps; ++k) {
    const double t = (k == steps) ? 1.0 : static_cast<double>(k) / steps;
    Matrix pb;
    Matrix dpb;
    if (base == BaseFamily::info) {
      pb = info.at(t);
      dpb = lyapunov_rhs(info.a, pb);
    } else {
      const Matrix m = eye - t * omt.q;
      pb = m * p0.mat() * m.transpose();
      const Matrix qpm = omt.q * p0.mat() * m.transpose();
      dpb = -(qpm + qpm.transpose());
    }
    const double s = t * (1.0 - t);
    const Matrix g = (s == 0.0) ? eye : expm(s * b);
    const Matrix dg = (1.0 - 2.0 * t) * b * g;
    Matrix p = g * pb * g.transpose();
    p = 0.5 * (p + p.transpose());
    const Matrix x = dg * pb * g.transpose();
    const Matrix dp = x + x.transpose() + g * dpb * g.transpose();
    // A = ½ Ṗ P^{-1} = ½ (P^{-1} Ṗ)'
    const Matrix a = 0.5 * Eigen::LLT<Matrix>(p).solve(dp).transpose();
    out.path.times.push_back(t);
    out.path.matrices.push_back(p);
    out.steering.push_back(a);
  }
  return out;
}

double quadrature_cost(const SampledPath& path, const std::vector<GeneralMatrix>& steering,
                       const CostSelector& sel) {
  if (path.size() != steering.size() || path.matrices.size() != path.size() || path.size() < 2)
    throw DimensionError("quadrature_cost: samples and steering are not aligned");
  std::vector<double> values(path.size());
  for (std::size_t k = 0; k < path.size(); ++k)
    values[k] = running_cost(sel, path.matrices[k], steering[k]);
  if (uniform_grid(path.times) && path.size() % 2 == 1)
    return simpson(values, path.times.front(), path.times.back());
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k)
    total += 0.5 * (values[k] + values[k - 1]) * (path.times[k] - path.times[k - 1]);
  return total;
}

VerifyReport verify_model(const PathModel& m, const VerifyOptions& opts) {
  VerifyReport r;
  const SpdMatrix& p0 = model_p0(m);
  r.r0 = rel_diff(model_at(m, 0.0), p0.mat());
  if (opts.p1) r.r1 = rel_diff(model_at(m, 1.0), opts.p1->mat());

  const double h = opts.fd_step;
  for (double t : check_times(opts)) {
    const Matrix dp = (model_at(m, t + h) - model_at(m, t - h)) / (2.0 * h);
    r.flow_residual = std::max(r.flow_residual, flow_defect(dp, model_steering(m, t), model_at(m, t)));
  }

  double cost_scale = 0.0;
  if (const auto* w = std::get_if<WlsModel>(&m)) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (int k = 0; k < opts.grid; ++k) {
      const double t = static_cast<double>(k) / std::max(1, opts.grid - 1);
      const double c = cost_eps(w->eps, w->steering(t));
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    r.cost_constancy = hi - lo;
    cost_scale = hi;
  }
  finish(r, opts, cost_scale);
  return r;
}

VerifyReport verify_model(const PathModel& m, const SteeredPath& samples, const VerifyOptions& opts) {
  if (samples.path.size() != samples.steering.size())
    throw DimensionError("verify: samples and steering are not aligned");
  VerifyReport r = verify_model(m, opts);
  for (std::size_t k = 0; k < samples.path.size(); ++k) {
    const double t = samples.path.times[k];
    require_same_dim(samples.path.matrices[k].rows(), model_dim(m), "verify");
    r.sample_residual = std::max(r.sample_residual, rel_diff(samples.path.matrices[k], model_at(m, t)));
    const GeneralMatrix a = model_steering(m, t);
    const double da = (samples.steering[k] - a).norm() / std::max(1.0, a.norm());
    r.sample_residual = std::max(r.sample_residual, da);
  }
  double cost_scale = 0.0;
  if (const auto* w = std::get_if<WlsModel>(&m)) cost_scale = w->running_cost();
  finish(r, opts, cost_scale);
  return r;
}

VerifyReport verify_sampled(const SteeredPath& samples, const std::optional<SpdMatrix>& p0,
                            const VerifyOptions& opts) {
  const SampledPath& path = samples.path;
  path.validate();
  if (samples.steering.size() != path.size())
    throw DimensionError("verify: samples and steering are not aligned");
  const std::size_t n = path.size();
  if (n < 3) throw DimensionError("verify: need at least three samples for the flow check");

  VerifyReport r;
  if (p0) r.r0 = rel_diff(path.matrices.front(), p0->mat());
  if (opts.p1) r.r1 = rel_diff(path.matrices.back(), opts.p1->mat());

  const auto& P = path.matrices;
  const auto& t = path.times;
  auto derivative = [&](std::size_t k) -> Matrix {
    if (uniform_grid(t) && n >= 5) {
      const double d = 12.0 * (t[1] - t[0]);
      if (k == 0) return (-25 * P[0] + 48 * P[1] - 36 * P[2] + 16 * P[3] - 3 * P[4]) / d;
      if (k == 1) return (-3 * P[0] - 10 * P[1] + 18 * P[2] - 6 * P[3] + P[4]) / d;
      if (k == n - 1)
        return (25 * P[n - 1] - 48 * P[n - 2] + 36 * P[n - 3] - 16 * P[n - 4] + 3 * P[n - 5]) / d;
      if (k == n - 2)
        return (3 * P[n - 1] + 10 * P[n - 2] - 18 * P[n - 3] + 6 * P[n - 4] - P[n - 5]) / d;
      return (-P[k + 2] + 8 * P[k + 1] - 8 * P[k - 1] + P[k - 2]) / d;
    }
    // Three-point Lagrange derivative on a nonuniform grid.
    const std::size_t c = std::clamp<std::size_t>(k, 1, n - 2);
    const double x0 = t[c - 1], x1 = t[c], x2 = t[c + 1], x = t[k];
    const double w0 = (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
    const double w1 = (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
    const double w2 = (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
    return w0 * P[c - 1] + w1 * P[c] + w2 * P[c + 1];
  };
  for (std::size_t k = 0; k < n; ++k)
    r.flow_residual = std::max(r.flow_residual, flow_defect(derivative(k), samples.steering[k], P[k]));
  finish(r, opts, 0.0);
  return r;
}

}  // namespace covpath
