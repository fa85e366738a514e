#pragma once

// Multichannel time series in, covariance sequences out, plus seeded
// synthetic data drawn from the three path families.

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "covpath/fitting.hpp"

namespace covpath {

struct TimeSeries {
  Matrix samples;  // T × n, one sample per row
  std::vector<std::string> labels;

  Index length() const { return samples.rows(); }
  Index channels() const { return samples.cols(); }
};

/// Comma-separated, one sample per row. The first row is a header when any
/// of its cells is not a number. Blank lines are skipped. Throws ParseError
/// (with the 1-based line number) on ragged rows, bad cells, non-finite
/// values or fewer than two samples.
TimeSeries parse_timeseries(std::istream& in);
TimeSeries load_timeseries(const std::string& path);

/// Divides each channel by its population standard deviation, optionally
/// subtracting channel means first. Throws DegenerateParameterError naming
/// a zero-variance channel.
TimeSeries normalize(const TimeSeries& ts, bool demean = false);

/// Second moments (1/L)Σxx' over `windows` consecutive windows of length
/// L = floor(T / windows); trailing samples are dropped. Times are k/(K)
/// for k = 0..K with K = windows − 1. When L < n the matrices are singular
/// and `warning` (if given) receives a message; PSD repair happens in fit.
CovSequence windowed_covariances(const TimeSeries& ts, Index windows, Exec exec = Exec::serial,
                                 std::string* warning = nullptr);

struct SynthData {
  CovSequence seq;
  PathModel truth;
};

/// Draws a random family member (λ(P0) in [0.5, 3], ‖param‖_F ≤ 1.5),
/// samples it at K + 1 uniform times in [0, 1], adds isotropic symmetric
/// Gaussian noise of scale sigma and PSD-repairs. For wls the skew part
/// rotates the eigenframe by 1.5π–2π radians over [0, 1] (subject to the
/// norm cap) so the family differs visibly from the info geodesics.
SynthData synth_generate(Family family, Index n, Index K, double sigma, std::uint64_t seed,
                         double eps = 20.0);

}  // namespace covpath
