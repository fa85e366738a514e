#include "covpath/path_model.hpp"

#include "covpath/error.hpp"

namespace covpath {

namespace {
template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
}  // namespace

Family family_of(const PathModel& m) {
  return std::visit(overloaded{[](const GeodesicOmt&) { return Family::omt; },
                               [](const GeodesicInfo&) { return Family::info; },
                               [](const WlsModel&) { return Family::wls; }},
                    m);
}

const char* family_name(Family f) {
  switch (f) {
    case Family::omt:
      return "omt";
    case Family::info:
      return "info";
    case Family::wls:
      return "wls";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "omt") return Family::omt;
  if (s == "info") return Family::info;
  if (s == "wls") return Family::wls;
  throw ParseError("unknown family '" + s + "' (expected omt, info or wls)", 0);
}

Matrix model_at(const PathModel& m, double t) {
  return std::visit([t](const auto& x) { return Matrix(x.at(t)); }, m);
}

GeneralMatrix model_steering(const PathModel& m, double t) {
  return std::visit([t](const auto& x) { return GeneralMatrix(x.steering(t)); }, m);
}

const SpdMatrix& model_p0(const PathModel& m) {
  return std::visit([](const auto& x) -> const SpdMatrix& { return x.p0; }, m);
}

const GeneralMatrix& model_param(const PathModel& m) {
  return std::visit(overloaded{[](const GeodesicOmt& g) -> const GeneralMatrix& { return g.q; },
                               [](const GeodesicInfo& g) -> const GeneralMatrix& { return g.a; },
                               [](const WlsModel& w) -> const GeneralMatrix& { return w.a0; }},
                    m);
}

Index model_dim(const PathModel& m) { return model_p0(m).dim(); }

CostSelector natural_cost(const PathModel& m) {
  return std::visit(overloaded{[](const GeodesicOmt&) { return CostSelector::omt(); },
                               [](const GeodesicInfo&) { return CostSelector::info1(); },
                               [](const WlsModel& w) { return CostSelector::wls(w.eps); }},
                    m);
}

}  // namespace covpath
