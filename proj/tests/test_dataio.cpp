#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "covpath/dataio.hpp"
#include "covpath/error.hpp"
#include "covpath/random.hpp"
#include "covpath/serialize.hpp"

using namespace covpath;

namespace {

TimeSeries parse(const std::string& text) {
  std::istringstream in(text);
  return parse_timeseries(in);
}

long parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_SUITE("dataio_cli") {

TEST_CASE("CSV parsing") {
  const TimeSeries plain = parse("1,2\n3,4\n5,6\n");
  CHECK(plain.length() == 3);
  CHECK(plain.channels() == 2);
  CHECK(plain.samples(2, 1) == 6.0);
  CHECK(plain.labels.empty());

  const TimeSeries named = parse("roi_a,roi_b\n\n1.5,-2e-3\n0,7\n");
  CHECK(named.length() == 2);
  CHECK(named.labels == std::vector<std::string>{"roi_a", "roi_b"});
  CHECK(named.samples(0, 1) == -2e-3);

  CHECK(parse_error_line("1,2\n3\n5,6\n") == 2);
  CHECK(parse_error_line("a,b\n1,2\n3,nan\n") == 3);
  CHECK(parse_error_line("1,2\n3,inf\n") == 2);
  CHECK(parse_error_line("1,2\n3,x\n") == 2);
  CHECK(parse_error_line("1,2\n") >= 0);
  CHECK(parse_error_line("") >= 0);
  CHECK_THROWS_AS(load_timeseries("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("channel normalization") {
  TimeSeries ts;
  ts.samples.resize(4, 2);
  ts.samples << 2, 1, -2, 1, 2, -1, -2, -1;
  const TimeSeries n = normalize(ts);
  CHECK((n.samples.col(0) - ts.samples.col(0) / 2.0).norm() == 0.0);
  CHECK((n.samples.col(1) - ts.samples.col(1)).norm() == 0.0);

  Rng rng(501);
  TimeSeries r;
  r.samples = random_gaussian(300, 4, rng, 3.0).array() + 1.0;
  for (bool demean : {false, true}) {
    const TimeSeries z = normalize(r, demean);
    for (Index c = 0; c < 4; ++c) {
      const Vector col = z.samples.col(c);
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      CHECK(std::abs(sd - 1.0) < 1e-12);
      if (demean) CHECK(std::abs(mean) < 1e-12);
    }
  }

  TimeSeries flat;
  flat.samples = Matrix::Ones(5, 3);
  flat.samples.col(0).setLinSpaced(5, 0.0, 1.0);
  flat.labels = {"x", "y", "z"};
  try {
    normalize(flat);
    FAIL("constant channel accepted");
  } catch (const DegenerateParameterError& e) {
    CHECK(std::string(e.what()).find("y") != std::string::npos);
  }
}

TEST_CASE("windowed second moments") {
  Rng rng(503);
  TimeSeries ts;
  ts.samples = random_gaussian(1200, 7, rng);
  const CovSequence seq = windowed_covariances(ts, 10);
  REQUIRE(seq.size() == 10);
  CHECK(seq.times.front() == 0.0);
  CHECK(seq.times.back() == 1.0);
  const double tol = 5.0 / std::sqrt(120.0);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Matrix block = ts.samples.middleRows(static_cast<Index>(k) * 120, 120);
    const Matrix expect = block.transpose() * block / 120.0;
    CHECK((seq.matrices[k] - expect).norm() < 1e-12);
    CHECK((seq.matrices[k] - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < tol);
  }
  const CovSequence one = windowed_covariances(ts, 1);
  CHECK(one.size() == 1);
  CHECK((one.matrices[0] - ts.samples.transpose() * ts.samples / 1200.0).norm() < 1e-12);

  // Trailing samples are dropped and the parallel path is bit-identical.
  ts.samples.conservativeResize(1207, 7);
  ts.samples.bottomRows(7).setConstant(100.0);
  const CovSequence serial = windowed_covariances(ts, 10, Exec::serial);
  const CovSequence parallel = windowed_covariances(ts, 10, Exec::parallel);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK((serial.matrices[k] - seq.matrices[k]).norm() == 0.0);
    CHECK((serial.matrices[k] - parallel.matrices[k]).norm() == 0.0);
  }

  std::string warning;
  windowed_covariances(ts, 400, Exec::serial, &warning);
  CHECK_FALSE(warning.empty());
  CHECK_THROWS(windowed_covariances(ts, 0));
}

TEST_CASE("JSON round trips are bit-exact") {
  Rng rng(507);
  CovSequence seq;
  for (int k = 0; k < 5; ++k) {
    seq.times.push_back(k / 4.0 + (k == 2 ? 1e-17 : 0.0));
    seq.matrices.push_back(random_spd(3, rng).mat() * std::pow(10.0, k - 2));
  }
  const CovSequence back = covseq_from_json(Json::parse(covseq_to_json(seq).dump()));
  CHECK(back.times == seq.times);
  for (std::size_t k = 0; k < seq.size(); ++k) CHECK((back.matrices[k].array() == seq.matrices[k].array()).all());

  const Matrix m = random_gaussian(3, 3, rng) * 1e-7;
  CHECK((matrix_from_json(Json::parse(matrix_to_json(m).dump())).array() == m.array()).all());
  CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"dim": 2, "entries": [[1, 2]]})")), ParseError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse(R"([1, 2])")), ParseError);

  const WlsModel w{random_spd(3, rng), random_gaussian(3, 3, rng), 20.0};
  const SteeredPath samples = sample_model(w, 10);
  const PathDocument doc = path_from_json(Json::parse(path_to_json(w, std::nullopt, samples).dump()));
  REQUIRE(doc.model.has_value());
  const auto& wb = std::get<WlsModel>(*doc.model);
  CHECK(wb.eps == 20.0);
  CHECK((wb.a0.array() == w.a0.array()).all());
  CHECK((wb.p0.mat().array() == w.p0.mat().array()).all());
  REQUIRE(doc.samples.has_value());
  CHECK(doc.samples->path.times == samples.path.times);
  CHECK((doc.samples->path.matrices[4].array() == samples.path.matrices[4].array()).all());
  CHECK_FALSE(doc.p1.has_value());
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "covpath_dataio_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "seq.json").string();
  Json j = {{"a", 1.25}};
  write_json_file(path, j);
  CHECK(read_json_file(path) == j);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  {
    std::ofstream(dir / "bad.json") << "{not json";
  }
  CHECK_THROWS_AS(read_json_file((dir / "bad.json").string()), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic data") {
  for (Family f : {Family::omt, Family::info, Family::wls}) {
    const SynthData a = synth_generate(f, 3, 9, 0.05, 42);
    const SynthData b = synth_generate(f, 3, 9, 0.05, 42);
    REQUIRE(a.seq.size() == 10);
    for (std::size_t k = 0; k < a.seq.size(); ++k)
      CHECK((a.seq.matrices[k].array() == b.seq.matrices[k].array()).all());
    CHECK(family_of(a.truth) == f);
    const SpdMatrix& p0 = model_p0(a.truth);
    CHECK(p0.lambda_min() >= 0.5 - 1e-12);
    CHECK(p0.lambda_max() <= 3.0 + 1e-12);
    CHECK(model_param(a.truth).norm() <= 1.5 + 1e-12);

    const SynthData clean = synth_generate(f, 3, 9, 0.0, 42);
    for (std::size_t k = 0; k < clean.seq.size(); ++k)
      CHECK((clean.seq.matrices[k] - model_at(clean.truth, clean.seq.times[k])).norm() < 1e-12);
    VerifyOptions v;
    v.tol = 1e-6;
    CHECK(verify_model(clean.truth, v).pass);
  }
  CHECK(std::get<WlsModel>(synth_generate(Family::wls, 3, 9, 0.0, 1).truth).eps == 20.0);
}

TEST_CASE("plot data reproduces the path file") {
  Rng rng(509);
  const GeodesicInfo g = info_geodesic(random_spd(3, rng), random_spd(3, rng));
  const SteeredPath samples = sample_model(g, 12);
  const Json j = Json::parse(path_to_json(g, std::nullopt, samples).dump());
  std::istringstream csv(plot_data_csv(samples));
  std::string line;
  std::getline(csv, line);
  const auto header = split(line);
  CHECK(header.size() == 1 + 2 * 9);
  CHECK(header[0] == "t");
  CHECK(header[1] == "P_11");
  CHECK(header[10] == "A_11");
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    const auto cells = split(line);
    REQUIRE(cells.size() == header.size());
    CHECK(std::stod(cells[0]) == j["times"][row].get<double>());
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        CHECK(std::stod(cells[1 + 3 * i + k]) == j["matrices"][row]["entries"][i][k].get<double>());
        CHECK(std::stod(cells[10 + 3 * i + k]) == j["steering"][row]["entries"][i][k].get<double>());
      }
    ++row;
  }
  CHECK(row == samples.path.size());
}

}  // TEST_SUITE
