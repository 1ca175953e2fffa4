#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace subfbsde::cli {

/// The published scenario schema, embedded at build time.
std::string_view scenario_schema_text();
const nlohmann::json& scenario_schema();

/// Validates `doc` against the subset of JSON Schema used by the scenario
/// schema: type, enum, properties, required, additionalProperties (boolean),
/// oneOf, minimum, maximum, exclusiveMinimum, exclusiveMaximum, minLength.
/// Returns one message per violation, each starting with the JSON path.
std::vector<std::string> validate_against(const nlohmann::json& schema, const nlohmann::json& doc);

}  // namespace subfbsde::cli
