#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lkcurv/boundary.hpp"
#include "lkcurv/limits.hpp"
#include "lkcurv/polar.hpp"

namespace lkcurv {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "lkcurv-report/1";

Json to_json(const Tolerance& t);
Json to_json(const IdentityReport& r);
Json to_json(const LimitEstimate& e);
Json to_json(const SeriesPoint& p);
Json to_json(const PolarEstimate& p);
Json to_json(const BoundaryMeasure& b);
Json to_json(const MorseReport& m);
Json to_json(const BdkResult& b);
Json to_json(const ConstructibleFunction& f, const StratifiedSpace& space);
Json describe(const StratifiedSpace& space);

/// {"schema", "command", "results", "summary"}; summary counts pass flags
/// of results that carry one.
Json make_document(const std::string& command, const Json& config, Json results);

std::string csv_header(const std::vector<std::string>& columns);
std::string csv_row(const std::vector<std::string>& fields);
std::string csv_number(double x);

std::string identity_csv(const std::vector<IdentityReport>& reports);

}  // namespace lkcurv
