#include "schema.hpp"

#include "scenario_schema_text.hpp"

namespace subfbsde::cli {

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()));
  }
  return false;
}

std::string child(const std::string& path, const std::string& key) { return path + "." + key; }

void check(const json& schema, const json& v, const std::string& path, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(v, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || has_type(v, alt.get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": expected " + t.dump() + ", got " + v.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) errors.push_back(path + ": " + v.dump() + " is not one of " + schema["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
      errors.push_back(path + ": " + v.dump() + " is below the minimum " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
      errors.push_back(path + ": " + v.dump() + " is above the maximum " + schema["maximum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && !(x > schema["exclusiveMinimum"].get<double>())) {
      errors.push_back(path + ": " + v.dump() + " must be greater than " + schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("exclusiveMaximum") && !(x < schema["exclusiveMaximum"].get<double>())) {
      errors.push_back(path + ": " + v.dump() + " must be less than " + schema["exclusiveMaximum"].dump());
    }
  }
  if (v.is_string() && schema.contains("minLength") &&
      v.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
    errors.push_back(path + ": string is shorter than " + schema["minLength"].dump());
  }
  if (schema.contains("oneOf")) {
    std::size_t matches = 0;
    std::vector<std::string> first_errors;
    for (const auto& alt : schema["oneOf"]) {
      std::vector<std::string> sub;
      check(alt, v, path, sub);
      if (sub.empty()) {
        ++matches;
      } else if (first_errors.empty() || sub.size() < first_errors.size()) {
        first_errors = sub;
      }
    }
    if (matches != 1) {
      if (matches == 0 && !first_errors.empty()) {
        errors.insert(errors.end(), first_errors.begin(), first_errors.end());
      } else {
        errors.push_back(path + ": matches " + std::to_string(matches) + " alternatives, expected exactly one");
      }
    }
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!v.contains(key.get<std::string>())) {
          errors.push_back(child(path, key.get<std::string>()) + ": required key is missing");
        }
      }
    }
    const json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"].is_boolean() &&
                        !schema["additionalProperties"].get<bool>();
    for (const auto& [key, value] : v.items()) {
      if (props && props->contains(key)) {
        check((*props)[key], value, child(path, key), errors);
      } else if (closed) {
        errors.push_back(child(path, key) + ": unknown key");
      }
    }
  }
}

}  // namespace

std::string_view scenario_schema_text() { return kScenarioSchemaText; }

const nlohmann::json& scenario_schema() {
  static const nlohmann::json schema = nlohmann::json::parse(kScenarioSchemaText);
  return schema;
}

std::vector<std::string> validate_against(const nlohmann::json& schema, const nlohmann::json& doc) {
  std::vector<std::string> errors;
  check(schema, doc, "$", errors);
  return errors;
}

}  // namespace subfbsde::cli
