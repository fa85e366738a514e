#pragma once

// JSON wire formats and file helpers. Matrices are {"dim": n, "entries":
// [[row-major]]}; doubles are written in shortest round-trip form, so
// load(save(x)) == x bit for bit.

#include <optional>
#include <string>

#include <json.hpp>

#include "covpath/dataio.hpp"
#include "covpath/oracle.hpp"

namespace covpath {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
/// Throws ParseError when the object is malformed or the shape disagrees with "dim".
Matrix matrix_from_json(const Json& j, const std::string& what = "matrix");

/// A path file: model parameters when known, the target endpoint when
/// known, and the sampled path with its steering matrices.
struct PathDocument {
  std::optional<PathModel> model;
  std::optional<SpdMatrix> p1;
  std::optional<SteeredPath> samples;
};

/// {"family", "P0", "param", "eps"?, "P1"?, "times", "matrices", "steering"}.
Json path_to_json(const PathModel& m, const std::optional<SpdMatrix>& p1, const SteeredPath& samples);
/// Accepts path files, WLS solution files ("A0" in place of "param") and
/// fit results. Sampled-only files (no "param"/"A0") are allowed.
PathDocument path_from_json(const Json& j);

/// {"family": "wls", "eps", "alpha", "P0", "P1", "Pi", "A0", "residual", "cost",
///  "branch", "iterations"} plus the sampled path.
Json wls_solution_to_json(const WlsSolution& s, const SpdMatrix& p1, const SteeredPath& samples);

Json covseq_to_json(const CovSequence& seq);
CovSequence covseq_from_json(const Json& j);

/// FitResult plus the fitted path sampled at the knot times, and the ε
/// table when given.
Json fit_to_json(const FitResult& r, const std::vector<EpsTableRow>* table = nullptr);

/// {"endpoint_residual": [r0, r1], "flow_residual", "cost_constancy",
///  "sample_residual", "pass", "seed"}.
Json verify_to_json(const VerifyReport& r);

/// Reads and parses a JSON file; ParseError on I/O or syntax errors.
Json read_json_file(const std::string& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const Json& j);

/// Wide CSV: t, P_11, P_12, …, P_nn, A_11, …, A_nn (all n² entries each).
std::string plot_data_csv(const SteeredPath& samples);

}  // namespace covpath
