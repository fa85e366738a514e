#pragma once

// Tagged union over the three path families, so callers that only need
// P_t and A_t (oracle, fitting, I/O) do not care which family they hold.

#include <string>
#include <variant>

#include "covpath/geodesics.hpp"
#include "covpath/wls.hpp"

namespace covpath {

using PathModel = std::variant<GeodesicOmt, GeodesicInfo, WlsModel>;

enum class Family { omt, info, wls };

Family family_of(const PathModel& m);
const char* family_name(Family f);
/// Parses "omt" | "info" | "wls"; throws ParseError otherwise.
Family parse_family(const std::string& s);

Matrix model_at(const PathModel& m, double t);
GeneralMatrix model_steering(const PathModel& m, double t);
const SpdMatrix& model_p0(const PathModel& m);
/// Q for omt, A for info, A0 for wls.
const GeneralMatrix& model_param(const PathModel& m);
Index model_dim(const PathModel& m);

/// Cost each family is optimal for: tr(APA'), the Fisher–Rao form
/// 2tr(AA + P^{-1}APA'), or ‖A_s‖² + ε‖A_a‖².
CostSelector natural_cost(const PathModel& m);

}  // namespace covpath
