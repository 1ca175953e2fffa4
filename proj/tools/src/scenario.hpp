#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "subfbsde/clock.hpp"
#include "subfbsde/coefficients.hpp"
#include "subfbsde/fbsde_solver.hpp"

namespace subfbsde::cli {

/// A configuration problem; `key` names the offending entry ("$" for the whole file).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string key, const std::string& what) : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Constant forcings for solve-linear.
struct ForcingConstants {
  double b0 = 0.0, g0 = 0.0, delta0 = 0.0, h0 = 0.0, sigma0 = 0.0, phi0 = 0.0;
};

struct ScenarioConfig {
  nlohmann::json raw;
  std::uint64_t config_hash = 0;

  std::string scenario;
  std::uint64_t seed = 0;
  SubordinatorSpec spec;
  TimeGrid grid;
  std::size_t n_paths = 10000;
  double x0 = 1.0;
  std::string bundle_name = "canonical_monotone";
  BundleParams bundle_params;
  std::optional<Orientation> orientation;
  ContinuationConfig solver;
  ForcingConstants forcings;
  HypothesisSampler sampler;
  bool strict = false;
  std::size_t export_paths = 5;
  std::string output_dir = ".";

  CoefficientBundle bundle() const;
  std::string hash_hex() const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Schema validation first, then semantic checks; throws ValidationError.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace subfbsde::cli
