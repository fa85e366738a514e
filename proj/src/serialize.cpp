#include "covpath/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "covpath/error.hpp"

namespace covpath {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0);
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number", 0);
  return v.get<double>();
}

std::vector<double> numbers(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array", 0);
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) throw ParseError(std::string("field '") + key + "' must hold numbers", 0);
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<Matrix> matrices(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array", 0);
  std::vector<Matrix> out;
  for (const Json& x : v) out.push_back(matrix_from_json(x, key));
  return out;
}

Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json a = Json::array();
  for (const Matrix& m : ms) a.push_back(matrix_to_json(m));
  return a;
}

void put_samples(Json& j, const SteeredPath& s) {
  j["times"] = s.path.times;
  j["matrices"] = matrices_to_json(s.path.matrices);
  j["steering"] = matrices_to_json(s.steering);
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"dim", m.rows()}, {"entries", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
    throw ParseError(what + ": expected {\"dim\", \"entries\"}", 0);
  if (!j["dim"].is_number_integer() || j["dim"].get<long>() < 1)
    throw ParseError(what + ": \"dim\" must be a positive integer", 0);
  const auto n = static_cast<Index>(j["dim"].get<long>());
  const Json& e = j["entries"];
  if (!e.is_array() || static_cast<Index>(e.size()) != n)
    throw ParseError(what + ": \"entries\" must have dim rows", 0);
  Matrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    const Json& row = e[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw ParseError(what + ": every row must have dim entries", 0);
    for (Index c = 0; c < n; ++c) {
      const Json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) throw ParseError(what + ": entries must be numbers", 0);
      m(r, c) = x.get<double>();
    }
  }
  return m;
}

Json path_to_json(const PathModel& m, const std::optional<SpdMatrix>& p1, const SteeredPath& samples) {
  Json j;
  j["family"] = family_name(family_of(m));
  j["P0"] = matrix_to_json(model_p0(m).mat());
  j["param"] = matrix_to_json(model_param(m));
  if (const auto* w = std::get_if<WlsModel>(&m)) j["eps"] = w->eps;
  if (p1) j["P1"] = matrix_to_json(p1->mat());
  put_samples(j, samples);
  return j;
}

PathDocument path_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("path file must hold a JSON object", 0);
  PathDocument doc;
  const bool has_param = j.contains("param") || j.contains("A0");
  if (has_param) {
    const Family fam = parse_family(field(j, "family").get<std::string>());
    const SpdMatrix p0(matrix_from_json(field(j, "P0"), "P0"));
    const Matrix param = matrix_from_json(j.contains("param") ? j["param"] : j["A0"], "param");
    require_same_dim(param.rows(), p0.dim(), "path file");
    switch (fam) {
      case Family::omt:
        doc.model = GeodesicOmt{p0, param};
        break;
      case Family::info:
        doc.model = GeodesicInfo{p0, param};
        break;
      case Family::wls:
        doc.model = WlsModel{p0, param, number(j, "eps")};
        break;
    }
  }
  if (j.contains("P1")) doc.p1 = SpdMatrix(matrix_from_json(j["P1"], "P1"));
  if (j.contains("times")) {
    SteeredPath s;
    s.path.times = numbers(j, "times");
    s.path.matrices = matrices(j, "matrices");
    s.steering = matrices(j, "steering");
    if (s.path.times.size() != s.path.matrices.size() || s.steering.size() != s.path.times.size())
      throw ParseError("path file: times, matrices and steering differ in length", 0);
    doc.samples = std::move(s);
  }
  if (!doc.model && !doc.samples) throw ParseError("path file has neither parameters nor samples", 0);
  return doc;
}

Json wls_solution_to_json(const WlsSolution& s, const SpdMatrix& p1, const SteeredPath& samples) {
  Json j;
  j["family"] = "wls";
  j["eps"] = s.model.eps;
  j["alpha"] = s.alpha;
  j["P0"] = matrix_to_json(s.model.p0.mat());
  j["P1"] = matrix_to_json(p1.mat());
  j["Pi"] = matrix_to_json(s.pi.mat());
  j["A0"] = matrix_to_json(s.model.a0);
  j["residual"] = s.residual;
  j["cost"] = s.cost;
  j["branch"] = s.branch;
  j["iterations"] = s.iterations;
  put_samples(j, samples);
  return j;
}

Json covseq_to_json(const CovSequence& seq) {
  return Json{{"times", seq.times}, {"matrices", matrices_to_json(seq.matrices)}};
}

CovSequence covseq_from_json(const Json& j) {
  CovSequence seq;
  seq.times = numbers(j, "times");
  seq.matrices = matrices(j, "matrices");
  try {
    seq.validate();
  } catch (const DimensionError& e) {
    throw ParseError(e.what(), 0);
  }
  return seq;
}

Json fit_to_json(const FitResult& r, const std::vector<EpsTableRow>* table) {
  SteeredPath knots;
  for (double t : r.times) {
    knots.path.times.push_back(t);
    knots.path.matrices.push_back(model_at(r.params, t));
    knots.steering.push_back(model_steering(r.params, t));
  }
  Json j;
  j["family"] = family_name(r.family);
  j["P0"] = matrix_to_json(model_p0(r.params).mat());
  j["param"] = matrix_to_json(model_param(r.params));
  if (r.family == Family::wls) j["eps"] = r.eps;
  j["objective"] = r.objective;
  j["normalized_error"] = r.normalized_error;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["multistart_index"] = r.multistart_index;
  put_samples(j, knots);
  if (table) {
    Json rows = Json::array();
    for (const EpsTableRow& row : *table)
      rows.push_back({{"eps", row.eps},
                      {"objective", row.objective},
                      {"normalized_error", row.normalized_error},
                      {"multistart_index", row.multistart_index},
                      {"warm", row.warm}});
    j["eps_table"] = std::move(rows);
  }
  return j;
}

Json verify_to_json(const VerifyReport& r) {
  return Json{{"endpoint_residual", {r.r0, r.r1}},
              {"flow_residual", r.flow_residual},
              {"cost_constancy", r.cost_constancy},
              {"sample_residual", r.sample_residual},
              {"pass", r.pass},
              {"seed", r.seed}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write '" + tmp.string() + "'", 0);
    out << content;
    out.flush();
    if (!out) throw ParseError("write failed for '" + tmp.string() + "'", 0);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ParseError("cannot move output into place at '" + path + "'", 0);
  }
}

void write_json_file(const std::string& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::string plot_data_csv(const SteeredPath& samples) {
  const std::size_t count = samples.path.size();
  if (count == 0) return {};
  const Index n = samples.path.matrices.front().rows();
  // Two-digit indices would be ambiguous without a separator.
  const std::string sep = n > 9 ? "_" : "";
  std::string out = "t";
  for (const char* name : {"P", "A"})
    for (Index i = 1; i <= n; ++i)
      for (Index j = 1; j <= n; ++j)
        out += "," + std::string(name) + "_" + std::to_string(i) + sep + std::to_string(j);
  out += "\n";
  for (std::size_t k = 0; k < count; ++k) {
    append_number(out, samples.path.times[k]);
    for (const Matrix* m : {&samples.path.matrices[k], &samples.steering[k]})
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          out += ',';
          append_number(out, (*m)(i, j));
        }
    out += "\n";
  }
  return out;
}

}  // namespace covpath
