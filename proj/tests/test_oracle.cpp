#include <doctest.h>

#include <cmath>

#include "covpath/error.hpp"
#include "covpath/oracle.hpp"
#include "covpath/random.hpp"
#include "oracles.hpp"

using namespace covpath;

namespace {

const SpdMatrix kP0 = SpdMatrix::diagonal(Eigen::Vector2d(1.0, 2.0));
const SpdMatrix kP1 = SpdMatrix::diagonal(Eigen::Vector2d(2.0, 1.0));

GeneralMatrix zero_steering(double) { return Matrix::Zero(2, 2); }

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("flow integration examples") {
  const SampledPath still = integrate_flow(kP0, zero_steering, 10);
  CHECK(still.size() == 11);
  for (const Matrix& m : still.matrices) CHECK((m - kP0.mat()).norm() == 0.0);

  Rng rng(301);
  const SpdMatrix p0 = random_spd(3, rng);
  const Matrix a = random_symmetric(3, rng, 0.5).mat();
  const SampledPath path = integrate_flow(p0, [&](double) { return a; });
  const Matrix ea = oracle::taylor_expm(a);
  CHECK((path.matrices.back() - ea * p0.mat() * ea).norm() < 1e-10);

  const GeodesicOmt g = omt_geodesic(kP0, kP1);
  const SampledPath omt = integrate_flow(kP0, [&](double t) { return g.steering(t); });
  CHECK((omt.matrices.back() - kP1.mat()).norm() < 1e-8);
  CHECK_THROWS_AS(integrate_flow(kP0, zero_steering, 9), DegenerateParameterError);
}

TEST_CASE("halving the step barely moves the endpoint") {
  Rng rng(303);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 2 + trial % 3;
    const WlsModel m{random_spd(n, rng), oracle::random_matrix(n, rng, 0.5), 1.0 + trial};
    auto steer = [&](double t) { return m.steering(t); };
    const Matrix coarse = integrate_flow(m.p0, steer, 500).matrices.back();
    const Matrix fine = integrate_flow(m.p0, steer, 1000).matrices.back();
    CHECK((coarse - fine).norm() < 1e-8);
  }
}

TEST_CASE("flow integration flags loss of positive definiteness") {
  // OMT-form steering with I − tQ singular at t = 0.625.
  const GeodesicOmt g{kP0, Matrix::Identity(2, 2) * 1.6};
  bool thrown = false;
  try {
    integrate_flow(kP0, [&](double t) { return GeneralMatrix(g.q * (t * g.q - Matrix::Identity(2, 2)).inverse()); }, 64);
  } catch (const FlowError& e) {
    thrown = true;
    CHECK(e.t() > 0.0);
    CHECK(e.t() <= 1.0);
  } catch (const Error&) {
    thrown = true;
  }
  CHECK(thrown);
}

TEST_CASE("integrated flow matches every family's closed form") {
  Rng rng(307);
  for (Index n : {2, 3, 5}) {
    const SpdMatrix a = random_spd(n, rng);
    const SpdMatrix b = random_spd(n, rng);
    const std::vector<PathModel> models{omt_geodesic(a, b), info_geodesic(a, b),
                                        WlsModel{a, oracle::random_matrix(n, rng, 0.5), 3.0}};
    for (const PathModel& m : models) {
      const SampledPath path = integrate_flow(model_p0(m), [&](double t) { return model_steering(m, t); });
      double worst = 0.0;
      for (std::size_t k = 0; k < path.size(); ++k)
        worst = std::max(worst, (path.matrices[k] - model_at(m, path.times[k])).norm());
      CHECK(worst < 1e-7);
    }
  }
}

TEST_CASE("perturbed feasible paths keep their endpoints") {
  Rng rng(311);
  const SpdMatrix a = random_spd(3, rng);
  const SpdMatrix b = random_spd(3, rng);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (BaseFamily base : {BaseFamily::info, BaseFamily::omt}) {
      const SteeredPath p = perturbed_feasible_path(a, b, seed, base, 100);
      CHECK(p.path.size() == 101);
      CHECK((p.path.matrices.front() - a.mat()).norm() <= 1e-10);
      CHECK((p.path.matrices.back() - b.mat()).norm() <= 1e-10);
      CHECK_NOTHROW(p.path.validate());
      // Steering reproduces the sampled derivative.
      const std::size_t k = 40;
      const double h = p.path.times[k + 1] - p.path.times[k];
      const Matrix dp = (p.path.matrices[k + 1] - p.path.matrices[k - 1]) / (2 * h);
      const Matrix& pk = p.path.matrices[k];
      const Matrix& ak = p.steering[k];
      CHECK((dp - ak * pk - pk * ak.transpose()).norm() < 1e-3 * std::max(1.0, dp.norm()));
    }
  }
  // Zero amplitude gives the base geodesic itself.
  const SteeredPath flat = perturbed_feasible_path(a, b, 5, BaseFamily::info, 50, 0.0);
  const GeodesicInfo g = info_geodesic(a, b);
  for (std::size_t k = 0; k < flat.path.size(); ++k) {
    CHECK((flat.path.matrices[k] - g.at(flat.path.times[k])).norm() < 1e-12);
    CHECK((flat.steering[k] - g.a).norm() < 1e-10);
  }
  const double fr2 = std::pow(fr_distance(a, b), 2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SteeredPath p = perturbed_feasible_path(a, b, seed);
    CHECK(quadrature_cost(p.path, p.steering, CostSelector::info1()) >= fr2 - 1e-9);
  }
}

TEST_CASE("quadrature cost values") {
  const SteeredPath still = sample_model(info_geodesic(kP0, kP0), 20);
  CHECK(quadrature_cost(still.path, still.steering, CostSelector::info1()) < 1e-28);

  const SteeredPath omt = sample_model(omt_geodesic(kP0, kP1), kDefaultFlowSteps);
  const SteeredPath fr = sample_model(info_geodesic(kP0, kP1), kDefaultFlowSteps);
  CHECK(std::abs(quadrature_cost(omt.path, omt.steering, CostSelector::omt()) - 0.34314575050761980479) < 1e-7);
  CHECK(std::abs(quadrature_cost(fr.path, fr.steering, CostSelector::info2()) - 0.96090602783640284933) < 1e-7);

  // Refinement stability on a smooth WLS path.
  Rng rng(313);
  const WlsModel m{random_spd(3, rng), oracle::random_matrix(3, rng, 0.6), 2.0};
  const SteeredPath c1 = sample_model(m, 500);
  const SteeredPath c2 = sample_model(m, 1000);
  CHECK(std::abs(quadrature_cost(c1.path, c1.steering, CostSelector::omt()) -
                 quadrature_cost(c2.path, c2.steering, CostSelector::omt())) < 1e-8);

  // Odd interval count falls back to the trapezoid rule; a linear integrand is exact.
  SampledPath lin;
  std::vector<GeneralMatrix> steer;
  for (int k = 0; k <= 3; ++k) {
    lin.times.push_back(k / 3.0);
    lin.matrices.push_back(Matrix::Identity(1, 1) * (1.0 + k / 3.0));
    steer.push_back(Matrix::Identity(1, 1));
  }
  CHECK(quadrature_cost(lin, steer, CostSelector::omt()) == doctest::Approx(1.5).epsilon(1e-14));
  steer.pop_back();
  CHECK_THROWS_AS(quadrature_cost(lin, steer, CostSelector::omt()), DimensionError);
}

TEST_CASE("sampled path validation") {
  SampledPath p;
  p.times = {0.0, 0.5, 1.0};
  p.matrices = {kP0.mat(), kP0.mat(), kP1.mat()};
  CHECK_NOTHROW(p.validate());
  p.times = {0.0, 0.5, 0.9};
  CHECK_THROWS_AS(p.validate(), DimensionError);
  p.times = {0.0, 0.5, 0.5};
  CHECK_THROWS(p.validate());
  p.times = {0.0, 0.5, 1.0};
  p.matrices[1] = -kP0.mat();
  CHECK_THROWS_AS(p.validate(), NotPositiveDefiniteError);
  p.matrices[1] = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(p.validate(), DimensionError);
}

TEST_CASE("verify passes exact models and fails corrupted ones") {
  VerifyOptions opts;
  opts.tol = 1e-8;
  opts.p1 = kP1;
  opts.seed = 17;
  for (const PathModel& m : std::vector<PathModel>{omt_geodesic(kP0, kP1), info_geodesic(kP0, kP1)}) {
    const VerifyReport r = verify_model(m, opts);
    CHECK(r.pass);
    CHECK(r.seed == 17);
    CHECK(r.r1 < 1e-12);
  }
  const WlsSolution s = solve_continuation(kP0, kP1, 0.3);
  const VerifyReport rw = verify_model(s.model, opts);
  CHECK(rw.pass);
  CHECK(rw.cost_constancy < 1e-12);

  GeodesicInfo bad = info_geodesic(kP0, kP1);
  bad.a(0, 1) += 0.1;
  const VerifyReport rb = verify_model(bad, opts);
  CHECK_FALSE(rb.pass);
  CHECK(rb.r1 > 1e-3);

  // Samples that disagree with the model are caught.
  SteeredPath samples = sample_model(info_geodesic(kP0, kP1), 40);
  CHECK(verify_model(info_geodesic(kP0, kP1), samples, opts).pass);
  samples.path.matrices[7](0, 0) += 1e-3;
  const VerifyReport rs = verify_model(info_geodesic(kP0, kP1), samples, opts);
  CHECK_FALSE(rs.pass);
  CHECK(rs.sample_residual > 1e-5);
}

TEST_CASE("verify on samples alone") {
  VerifyOptions opts;
  opts.tol = 1e-6;
  opts.p1 = kP1;
  const SteeredPath good = sample_model(info_geodesic(kP0, kP1), 200);
  const VerifyReport r = verify_sampled(good, kP0, opts);
  CHECK(r.pass);
  CHECK(r.flow_residual < 1e-6);

  SteeredPath bad = good;
  for (auto& a : bad.steering) a(0, 0) += 0.05;
  const VerifyReport rb = verify_sampled(bad, kP0, opts);
  CHECK_FALSE(rb.pass);
  CHECK(rb.flow_residual > 1e-3);

  // Coarse non-uniform grids fall back to a lower-order stencil.
  SteeredPath sparse;
  const GeodesicInfo g = info_geodesic(kP0, kP1);
  for (double t : {0.0, 0.1, 0.3, 0.35, 0.6, 0.8, 1.0}) {
    sparse.path.times.push_back(t);
    sparse.path.matrices.push_back(g.at(t));
    sparse.steering.push_back(g.a);
  }
  VerifyOptions loose = opts;
  loose.tol = 0.05;
  CHECK(verify_sampled(sparse, kP0, loose).pass);
}

}  // TEST_SUITE
