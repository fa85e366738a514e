// covpath: command-line front end for covariance paths on the SPD manifold.
//
// Exit codes: 0 success (verify: pass), 1 usage or input error,
// 2 numerical failure (JSON error body on stderr; verify: fail).

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "covpath/dataio.hpp"
#include "covpath/error.hpp"
#include "covpath/kernels.hpp"
#include "covpath/random.hpp"
#include "covpath/serialize.hpp"
#include "covpath/sym_basis.hpp"

using namespace covpath;

namespace {

struct Globals {
  int jobs = 0;
  std::string plot_data;
};

SpdMatrix load_spd(const std::string& path) {
  return SpdMatrix(matrix_from_json(read_json_file(path), path));
}

void print_number(double v) {
  if (std::isinf(v))
    std::cout << (v > 0 ? "inf" : "-inf") << "\n";
  else
    std::cout << std::setprecision(17) << v << "\n";
}

void emit_plot_data(const Globals& g, const SteeredPath& s) {
  if (!g.plot_data.empty()) write_file_atomic(g.plot_data, plot_data_csv(s));
}

// "a:b:steps" → log-spaced grid.
std::vector<double> parse_grid(const std::string& text) {
  std::stringstream ss(text);
  std::string a, b, n;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n) )
    throw ParseError("--eps-grid expects a:b:steps", 0);
  try {
    return log_grid(std::stod(a), std::stod(b), std::stoi(n));
  } catch (const std::logic_error&) {
    throw ParseError("--eps-grid expects numbers in a:b:steps", 0);
  }
}

SymMatrix parse_init(const std::string& init, const SpdMatrix& p0, const SpdMatrix& p1) {
  const SymMatrix seed = pi_seed(p0, p1);
  if (init == "seed") return seed;
  if (init.rfind("rand:", 0) == 0) {
    std::uint64_t s = 0;
    try {
      s = std::stoull(init.substr(5));
    } catch (const std::logic_error&) {
      throw ParseError("--init rand:SEED needs an integer seed", 0);
    }
    Rng rng(s);
    const double scale = 0.5 * std::max(1.0, seed.norm()) / std::sqrt(static_cast<double>(sym_dim(p0.dim())));
    return seed + random_symmetric(p0.dim(), rng, scale);
  }
  // A bare matrix, or a previous solution file whose co-state is reused.
  const Json j = read_json_file(init);
  const Matrix m = matrix_from_json(j.is_object() && j.contains("Pi") ? j["Pi"] : j, init);
  return SymMatrix(m);
}

int run_geodesic(const Globals& g, const std::string& family, const std::string& p0f,
                 const std::string& p1f, const std::string& weight, int steps, const std::string& out) {
  const SpdMatrix p0 = load_spd(p0f);
  const SpdMatrix p1 = load_spd(p1f);
  require_same_dim(p0.dim(), p1.dim(), "geodesic");
  PathModel m;
  if (family == "omt") {
    m = weight.empty() ? omt_geodesic(p0, p1) : omt_geodesic_weighted(p0, p1, load_spd(weight));
  } else {
    if (!weight.empty()) throw ParseError("--weight applies to --family omt only", 0);
    m = info_geodesic(p0, p1);
  }
  const SteeredPath s = sample_model(m, steps);
  write_json_file(out, path_to_json(m, p1, s));
  emit_plot_data(g, s);
  return 0;
}

int run_wls(const Globals& g, const std::string& p0f, const std::string& p1f, std::optional<double> eps,
            std::optional<double> alpha, std::string method, const std::string& init,
            std::optional<double> homotopy, int steps, int points, bool override_bound, int samples,
            const std::string& out) {
  const SpdMatrix p0 = load_spd(p0f);
  const SpdMatrix p1 = load_spd(p1f);
  require_same_dim(p0.dim(), p1.dim(), "wls-path");
  const double a = alpha ? *alpha : alpha_from_eps(*eps);
  const double e = eps ? *eps : eps_from_alpha(*alpha);
  if (homotopy) method = "homotopy";
  const Exec exec = g.jobs == 1 ? Exec::serial : Exec::parallel;

  WlsSolution sol;
  if (method == "continuation") {
    ContinuationOptions o;
    o.steps = steps;
    o.override_bound = override_bound;
    o.exec = exec;
    sol = solve_continuation(p0, p1, a, o);
  } else if (method == "local") {
    LocalOptions o;
    o.branch = init;
    o.exec = exec;
    sol = solve_local(p0, p1, a, parse_init(init, p0, p1), o);
  } else {
    if (!homotopy) throw ParseError("--method homotopy needs --homotopy EPS_START", 0);
    if (!(e > 0.0)) throw DegenerateParameterError("homotopy sweeps need a positive target eps");
    LocalOptions o;
    o.branch = "homotopy:" + init;
    o.exec = exec;
    const std::vector<double> grid = geometric_grid(*homotopy, e, points);
    sol = solve_homotopy(p0, p1, grid, parse_init(init, p0, p1), o).back();
  }
  const SteeredPath s = sample_model(sol.model, samples);
  write_json_file(out, wls_solution_to_json(sol, p1, s));
  emit_plot_data(g, s);
  return 0;
}

int run_cov(const std::string& input, int windows, bool demean, bool no_normalize, const std::string& out) {
  TimeSeries ts = load_timeseries(input);
  if (demean && no_normalize) {
    for (Index j = 0; j < ts.channels(); ++j) ts.samples.col(j).array() -= ts.samples.col(j).mean();
  } else if (!no_normalize) {
    ts = normalize(ts, demean);
  }
  std::string warning;
  const CovSequence seq = windowed_covariances(ts, windows, Exec::parallel, &warning);
  if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
  write_json_file(out, covseq_to_json(seq));
  return 0;
}

int run_fit(const Globals& g, const std::string& covf, const std::string& family,
            std::optional<double> eps, const std::string& grid, int multistart, std::uint64_t seed,
            const std::string& out) {
  const CovSequence seq = covseq_from_json(read_json_file(covf));
  const Family fam = parse_family(family);
  FitOptions o;
  o.multistart = multistart;
  o.seed = seed;
  o.exec = g.jobs == 1 ? Exec::serial : Exec::parallel;
  Json j;
  FitResult r;
  if (fam == Family::wls && !eps) {
    const std::vector<double> values = grid.empty() ? default_eps_grid() : parse_grid(grid);
    const EpsSearchResult res = fit_eps_search(seq, values, o);
    r = res.best;
    j = fit_to_json(r, &res.table);
  } else {
    if (!grid.empty()) throw ParseError("--eps-grid applies to --family wls only", 0);
    if (eps) o.eps = *eps;
    r = fit(seq, fam, o);
    j = fit_to_json(r);
  }
  write_json_file(out, j);
  if (!g.plot_data.empty()) {
    SteeredPath s;
    for (double t : r.times) {
      s.path.times.push_back(t);
      s.path.matrices.push_back(model_at(r.params, t));
      s.steering.push_back(model_steering(r.params, t));
    }
    emit_plot_data(g, s);
  }
  return 0;
}

int run_synth(const Globals& g, const std::string& family, int n, int knots, double noise,
              std::uint64_t seed, double eps, const std::string& out, const std::string& truth) {
  const SynthData d = synth_generate(parse_family(family), n, knots, noise, seed, eps);
  write_json_file(out, covseq_to_json(d.seq));
  const SteeredPath s = sample_model(d.truth, 200);
  if (!truth.empty()) write_json_file(truth, path_to_json(d.truth, std::nullopt, s));
  emit_plot_data(g, s);
  return 0;
}

int run_verify(const std::string& model, double tol, std::uint64_t seed) {
  const PathDocument doc = path_from_json(read_json_file(model));
  VerifyOptions o;
  o.tol = tol;
  o.seed = seed;
  o.p1 = doc.p1;
  VerifyReport r;
  if (doc.model && doc.samples)
    r = verify_model(*doc.model, *doc.samples, o);
  else if (doc.model)
    r = verify_model(*doc.model, o);
  else
    r = verify_sampled(*doc.samples, std::nullopt, o);
  std::cout << verify_to_json(r).dump(2) << "\n";
  return r.pass ? 0 : 2;
}

void numerical_failure(const Error& e) {
  Json body{{"error", e.kind()}, {"message", e.what()}};
  if (const auto* c = dynamic_cast<const ContinuationBreakdownError*>(&e)) body["tau"] = c->tau();
  if (const auto* f = dynamic_cast<const FlowError*>(&e)) body["t"] = f->t();
  if (const auto* n = dynamic_cast<const NonConvergenceError*>(&e)) {
    body["residual"] = n->residual();
    body["best_iterate"] = n->best_iterate().cols() == n->best_iterate().rows()
                               ? matrix_to_json(n->best_iterate())
                               : Json(std::vector<double>(n->best_iterate().data(),
                                                          n->best_iterate().data() + n->best_iterate().size()));
  }
  std::cerr << body.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance paths on the SPD manifold: geodesics, WLS paths, fitting"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores, 1 = serial)")->check(CLI::NonNegativeNumber);
  app.add_option("--plot-data", g.plot_data, "Also write a wide CSV (t, P_ij, A_ij) of the emitted path");

  // geodesic
  auto* geo = app.add_subcommand("geodesic", "Closed-form OMT or Fisher-Rao geodesic");
  std::string geo_family, geo_p0, geo_p1, geo_w, geo_out;
  int geo_steps = 200;
  geo->add_option("--family", geo_family, "omt | info")->required()->check(CLI::IsMember({"omt", "info"}));
  geo->add_option("--p0", geo_p0, "Start matrix (JSON)")->required()->check(CLI::ExistingFile);
  geo->add_option("--p1", geo_p1, "End matrix (JSON)")->required()->check(CLI::ExistingFile);
  geo->add_option("--weight", geo_w, "Weight W for the weighted OMT cost (JSON)")->check(CLI::ExistingFile);
  geo->add_option("--steps", geo_steps, "Sampling intervals on [0, 1]")->check(CLI::PositiveNumber);
  geo->add_option("--out", geo_out, "Output path file")->required();

  // dist
  auto* dist = app.add_subcommand("dist", "Bures-Wasserstein or Fisher-Rao distance");
  std::string dist_metric, dist_p0, dist_p1;
  dist->add_option("--metric", dist_metric, "bw | fr")->required()->check(CLI::IsMember({"bw", "fr"}));
  dist->add_option("--p0", dist_p0)->required()->check(CLI::ExistingFile);
  dist->add_option("--p1", dist_p1)->required()->check(CLI::ExistingFile);

  // wls-path
  auto* wls = app.add_subcommand("wls-path", "Solve the WLS boundary-value problem");
  std::string wls_p0, wls_p1, wls_method = "continuation", wls_init = "seed", wls_out;
  std::optional<double> wls_eps, wls_alpha, wls_homotopy;
  int wls_steps = 200, wls_points = 40, wls_samples = 200;
  bool wls_override = false;
  wls->add_option("--p0", wls_p0)->required()->check(CLI::ExistingFile);
  wls->add_option("--p1", wls_p1)->required()->check(CLI::ExistingFile);
  auto* o_eps = wls->add_option("--eps", wls_eps, "Weight on the skew part");
  auto* o_alpha = wls->add_option("--alpha", wls_alpha, "alpha = (1 + eps)/(2 eps)");
  o_eps->excludes(o_alpha);
  wls->add_option("--method", wls_method, "continuation | local | homotopy")
      ->check(CLI::IsMember({"continuation", "local", "homotopy"}));
  wls->add_option("--init", wls_init, "Initial co-state: FILE | seed | rand:SEED");
  wls->add_option("--homotopy", wls_homotopy, "Sweep eps geometrically from this start value");
  wls->add_option("--homotopy-points", wls_points, "Grid points of the eps sweep")->check(CLI::PositiveNumber);
  wls->add_option("--steps", wls_steps, "RK4 steps of the continuation")->check(CLI::PositiveNumber);
  wls->add_option("--samples", wls_samples, "Sampling intervals of the output path")->check(CLI::PositiveNumber);
  wls->add_flag("--override-bound", wls_override, "Run continuation beyond the existence bound");
  wls->add_option("--out", wls_out)->required();

  // bound
  auto* bound = app.add_subcommand("bound", "Existence/uniqueness bound on |alpha|");
  std::string b_p0, b_p1;
  bound->add_option("--p0", b_p0)->required()->check(CLI::ExistingFile);
  bound->add_option("--p1", b_p1)->required()->check(CLI::ExistingFile);

  // cov
  auto* cov = app.add_subcommand("cov", "Windowed sample covariances from a CSV time series");
  std::string cov_in, cov_out;
  int cov_windows = 10;
  bool cov_demean = false, cov_raw = false;
  cov->add_option("--input", cov_in, "CSV, one sample per row")->required()->check(CLI::ExistingFile);
  cov->add_option("--windows", cov_windows, "Number of equal windows")->required()->check(CLI::PositiveNumber);
  cov->add_flag("--demean", cov_demean, "Subtract channel means");
  cov->add_flag("--no-normalize", cov_raw, "Skip the per-channel standard-deviation scaling");
  cov->add_option("--out", cov_out)->required();

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit a path family to a covariance sequence");
  std::string fit_in, fit_family, fit_grid, fit_out;
  std::optional<double> fit_eps;
  int fit_multi = 8;
  std::uint64_t fit_seed = 0;
  fitc->add_option("--covseq", fit_in)->required()->check(CLI::ExistingFile);
  fitc->add_option("--family", fit_family, "omt | info | wls")->required()->check(CLI::IsMember({"omt", "info", "wls"}));
  auto* f_eps = fitc->add_option("--eps", fit_eps, "Fixed eps (wls)");
  auto* f_grid = fitc->add_option("--eps-grid", fit_grid, "a:b:steps, log-spaced (wls; default 0.1:100:16)");
  f_eps->excludes(f_grid);
  fitc->add_option("--multistart", fit_multi, "Number of starts")->check(CLI::PositiveNumber);
  fitc->add_option("--seed", fit_seed, "Seed of the multistart perturbations");
  fitc->add_option("--out", fit_out)->required();

  // synth
  auto* syn = app.add_subcommand("synth", "Synthetic covariance sequence from a random family member");
  std::string syn_family, syn_out, syn_truth;
  int syn_n = 3, syn_k = 9;
  double syn_noise = 0.0, syn_eps = 20.0;
  std::uint64_t syn_seed = 0;
  syn->add_option("--family", syn_family)->required()->check(CLI::IsMember({"omt", "info", "wls"}));
  syn->add_option("--n", syn_n, "Dimension")->check(CLI::PositiveNumber);
  syn->add_option("--knots", syn_k, "K: samples at K + 1 uniform times")->check(CLI::NonNegativeNumber);
  syn->add_option("--noise", syn_noise, "Noise scale sigma")->check(CLI::NonNegativeNumber);
  syn->add_option("--eps", syn_eps, "eps of the wls generator")->check(CLI::PositiveNumber);
  syn->add_option("--seed", syn_seed);
  syn->add_option("--out", syn_out)->required();
  syn->add_option("--truth", syn_truth, "Also write the generating path");

  // verify
  auto* ver = app.add_subcommand("verify", "Check a path file against its flow equation");
  std::string ver_model;
  double ver_tol = 1e-6;
  std::uint64_t ver_seed = 0;
  ver->add_option("--model", ver_model)->required()->check(CLI::ExistingFile);
  ver->add_option("--tol", ver_tol)->check(CLI::PositiveNumber);
  ver->add_option("--seed", ver_seed, "Seed of the random check times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (wls->parsed() && !wls_eps && !wls_alpha) throw ParseError("wls-path: one of --eps or --alpha is required", 0);
    if (g.jobs > 0) kernels::set_threads(g.jobs);

    if (geo->parsed()) return run_geodesic(g, geo_family, geo_p0, geo_p1, geo_w, geo_steps, geo_out);
    if (dist->parsed()) {
      const SpdMatrix p0 = load_spd(dist_p0);
      const SpdMatrix p1 = load_spd(dist_p1);
      print_number(dist_metric == "bw" ? bw_distance(p0, p1) : fr_distance(p0, p1));
      return 0;
    }
    if (wls->parsed())
      return run_wls(g, wls_p0, wls_p1, wls_eps, wls_alpha, wls_method, wls_init, wls_homotopy, wls_steps,
                     wls_points, wls_override, wls_samples, wls_out);
    if (bound->parsed()) {
      print_number(existence_bound(load_spd(b_p0), load_spd(b_p1)));
      return 0;
    }
    if (cov->parsed()) return run_cov(cov_in, cov_windows, cov_demean, cov_raw, cov_out);
    if (fitc->parsed()) return run_fit(g, fit_in, fit_family, fit_eps, fit_grid, fit_multi, fit_seed, fit_out);
    if (syn->parsed()) return run_synth(g, syn_family, syn_n, syn_k, syn_noise, syn_seed, syn_eps, syn_out, syn_truth);
    if (ver->parsed()) return run_verify(ver_model, ver_tol, ver_seed);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    numerical_failure(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return 1;
}
