#include "covpath/dataio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "covpath/error.hpp"
#include "covpath/kernels.hpp"
#include "covpath/random.hpp"

namespace covpath {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Matrix random_skew(Index n, Rng& rng) {
  const Matrix g = random_gaussian(n, n, rng);
  return 0.5 * (g - g.transpose());
}

}  // namespace

TimeSeries parse_timeseries(std::istream& in) {
  TimeSeries ts;
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  bool first = true;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t j = 0; j < cells.size(); ++j)
      if (!parse_number(cells[j], values[j])) numeric = false;
    if (first) {
      first = false;
      width = cells.size();
      if (!numeric) {
        ts.labels = cells;
        continue;
      }
    }
    if (cells.size() != width) {
      std::ostringstream os;
      os << "line " << line_no << ": expected " << width << " columns, found " << cells.size();
      throw ParseError(os.str(), line_no);
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_number(cells[j], values[j])) {
        std::ostringstream os;
        os << "line " << line_no << ", column " << j + 1 << ": '" << cells[j] << "' is not a number";
        throw ParseError(os.str(), line_no);
      }
      if (!std::isfinite(values[j])) {
        std::ostringstream os;
        os << "line " << line_no << ", column " << j + 1 << ": non-finite value";
        throw ParseError(os.str(), line_no);
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() < 2) throw ParseError("time series needs at least two samples", line_no);
  ts.samples.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      ts.samples(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return ts;
}

TimeSeries load_timeseries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return parse_timeseries(in);
}

TimeSeries normalize(const TimeSeries& ts, bool demean) {
  TimeSeries out = ts;
  const double len = static_cast<double>(ts.length());
  for (Index j = 0; j < ts.channels(); ++j) {
    auto col = out.samples.col(j);
    const double mean = col.sum() / len;
    const double var = (col.array() - mean).square().sum() / len;
    if (!(var > 0.0)) {
      std::ostringstream os;
      os << "normalize: channel " << j + 1;
      if (static_cast<std::size_t>(j) < ts.labels.size()) os << " ('" << ts.labels[j] << "')";
      os << " has zero variance";
      throw DegenerateParameterError(os.str());
    }
    if (demean) col.array() -= mean;
    col /= std::sqrt(var);
  }
  return out;
}

CovSequence windowed_covariances(const TimeSeries& ts, Index windows, Exec exec, std::string* warning) {
  if (windows < 1) throw DegenerateParameterError("windowed_covariances: need at least one window");
  const Index len = ts.length() / windows;
  if (len < 1) throw DegenerateParameterError("windowed_covariances: more windows than samples");
  if (len < ts.channels() && warning) {
    std::ostringstream os;
    os << "window length " << len << " is below the channel count " << ts.channels()
       << "; sample covariances are singular and will be PSD-repaired";
    *warning = os.str();
  }
  CovSequence seq;
  seq.matrices = kernels::window_second_moments(ts.samples, len, windows, exec);
  for (Index k = 0; k < windows; ++k)
    seq.times.push_back(windows == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(windows - 1));
  return seq;
}

SynthData synth_generate(Family family, Index n, Index K, double sigma, std::uint64_t seed, double eps) {
  if (n < 1 || K < 0) throw DegenerateParameterError("synth: need n >= 1 and K >= 0");
  if (!(sigma >= 0.0)) throw DegenerateParameterError("synth: noise must be nonnegative");
  constexpr double kMaxNorm = 1.5;
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const SpdMatrix p0 = random_spd(n, rng, 0.5, 3.0);

  SynthData out;
  switch (family) {
    case Family::info: {
      const Matrix g = random_gaussian(n, n, rng);
      const double norm = 0.5 + uni(rng);
      out.truth = GeodesicInfo{p0, g * (norm / g.norm())};
      break;
    }
    case Family::omt: {
      Matrix q = random_gaussian(n, n, rng);
      q *= (0.3 + 0.7 * uni(rng)) / q.norm();
      const double spectral = Eigen::JacobiSVD<Matrix>(q).singularValues()(0);
      if (spectral > 0.8) q *= 0.8 / spectral;
      out.truth = GeodesicOmt{p0, q};
      break;
    }
    case Family::wls: {
      if (!(eps > 0.0)) throw DegenerateParameterError("synth: wls requires eps > 0");
      const Matrix s = random_symmetric(n, rng).mat();
      const Matrix as = (n > 0 && s.norm() > 0.0) ? Matrix(s * (0.6 / s.norm())) : s;
      Matrix aa = random_skew(n, rng);
      const double angle = std::numbers::pi * (1.5 + 0.5 * uni(rng));
      const double spectral = n > 1 ? Eigen::JacobiSVD<Matrix>(aa).singularValues()(0) : 0.0;
      if (spectral > 0.0) aa *= angle / ((1.0 + eps) * spectral);
      Matrix a = as + aa;
      if (a.norm() > kMaxNorm) {
        const double room = std::sqrt(std::max(kMaxNorm * kMaxNorm - as.squaredNorm(), 0.0));
        aa *= room / aa.norm();
        a = as + aa;
      }
      out.truth = WlsModel{p0, a, eps};
      break;
    }
  }

  for (Index k = 0; k <= K; ++k) {
    const double t = K == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(K);
    Matrix p = model_at(out.truth, t);
    if (sigma > 0.0) p = psd_repair(p + random_symmetric(n, rng, sigma).mat()).mat();
    out.seq.times.push_back(t);
    out.seq.matrices.push_back(p);
  }
  return out;
}

}  // namespace covpath
