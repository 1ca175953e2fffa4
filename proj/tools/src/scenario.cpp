#include "scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "schema.hpp"

namespace subfbsde::cli {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ScenarioConfig::hash_hex() const {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash));
  return buf;
}

CoefficientBundle ScenarioConfig::bundle() const {
  CoefficientBundle b = make_bundle(bundle_name, bundle_params);
  if (orientation) b.orientation = *orientation;
  return b;
}

namespace {

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
  return doc.contains(key) ? doc[key].get<T>() : fallback;
}

SubordinatorSpec parse_spec(const json& doc) {
  SubordinatorSpec spec;
  spec.kappa = get_or(doc, "kappa", 1.0);
  const auto kind = get_or<std::string>(doc, "jump_kind", "none");
  const double rate = get_or(doc, "rate", 1.0);
  const double param = get_or(doc, "jump_param", 1.0);
  if (kind == "none") {
    spec.jumps = NoJumps{};
  } else if (kind == "exponential") {
    spec.jumps = CompoundPoissonJumps{rate, ExponentialJumps{param}};
  } else if (kind == "fixed") {
    spec.jumps = CompoundPoissonJumps{rate, FixedJumps{param}};
  } else if (kind == "pareto") {
    spec.jumps = CompoundPoissonJumps{rate, ParetoJumps{get_or(doc, "jump_scale", 1.0), param}};
  } else {
    if (!doc.contains("jump_param")) throw ValidationError("jump_param", "truncated_stable needs jump_param (the index)");
    spec.jumps = TruncatedStableJumps{param, get_or(doc, "cutoff", 1e-3)};
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(kind == "truncated_stable" ? "jump_param" : "kappa", e.what());
  }
  return spec;
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
  const auto errors = validate_against(scenario_schema(), doc);
  if (!errors.empty()) {
    std::string msg = "scenario does not match the schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    const auto& first = errors.front();
    const auto key = first.substr(0, first.find(':'));
    throw ValidationError(key, msg);
  }

  ScenarioConfig cfg;
  cfg.raw = doc;
  cfg.config_hash = fnv1a(doc.dump());
  cfg.scenario = doc["scenario"].get<std::string>();
  cfg.seed = doc["seed"].get<std::uint64_t>();
  cfg.spec = parse_spec(doc);

  cfg.grid.a = get_or(doc, "a", 0.0);
  cfg.grid.T = get_or(doc, "T", 1.0);
  cfg.grid.n_steps = get_or<std::size_t>(doc, "n_steps", 100);
  if (!(cfg.grid.T > cfg.grid.a)) throw ValidationError("$.T", "T must exceed the activation delay a");
  cfg.n_paths = get_or<std::size_t>(doc, "n_paths", 10000);
  cfg.x0 = get_or(doc, "x0", 1.0);

  if (doc.contains("bundle")) {
    const auto& b = doc["bundle"];
    if (b.is_string()) {
      cfg.bundle_name = b.get<std::string>();
    } else {
      cfg.bundle_name = b["name"].get<std::string>();
      cfg.bundle_params.c = get_or(b, "c", 1.0);
    }
  }
  try {
    (void)make_bundle(cfg.bundle_name, cfg.bundle_params);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("$.bundle", e.what());
  }
  if (doc.contains("orientation")) {
    cfg.orientation = doc["orientation"] == "increasing" ? Orientation::increasing : Orientation::decreasing;
  }

  ContinuationConfig& s = cfg.solver;
  if (doc.contains("eta")) s.eta = doc["eta"].get<double>();
  s.picard_tol = get_or(doc, "picard_tol", s.picard_tol);
  s.max_picard = get_or(doc, "max_picard", s.max_picard);
  s.nested_max_depth = get_or(doc, "nested_max_depth", s.nested_max_depth);
  if (doc.contains("C1")) s.C1 = doc["C1"].get<double>();
  s.warm_start = get_or(doc, "warm_start", s.warm_start);
  s.strategy = get_or<std::string>(doc, "strategy", "flatten") == "nested" ? Strategy::nested : Strategy::flatten;
  if (doc.contains("basis")) {
    const auto& b = doc["basis"];
    s.linear.basis.degree = get_or(b, "degree", s.linear.basis.degree);
    s.linear.basis.include_r = get_or(b, "include_r", s.linear.basis.include_r);
    s.linear.basis.include_iterates = get_or(b, "include_iterates", s.linear.basis.include_iterates);
    if (b.contains("ridge")) s.linear.basis.ridge = b["ridge"].get<double>();
  }
  s.linear.condexp = get_or<std::string>(doc, "condexp", "regression") == "deterministic" ? CondExpMode::deterministic
                                                                                          : CondExpMode::regression;

  if (doc.contains("forcings")) {
    const auto& f = doc["forcings"];
    ForcingConstants& fc = cfg.forcings;
    fc.b0 = get_or(f, "b0", 0.0);
    fc.g0 = get_or(f, "g0", 0.0);
    fc.delta0 = get_or(f, "delta0", 0.0);
    fc.h0 = get_or(f, "h0", 0.0);
    fc.sigma0 = get_or(f, "sigma0", 0.0);
    fc.phi0 = get_or(f, "phi0", 0.0);
  }

  cfg.sampler.t_min = 0.0;
  cfg.sampler.t_max = cfg.grid.T;
  cfg.sampler.seed = cfg.seed;
  if (doc.contains("sampler")) {
    const auto& sm = doc["sampler"];
    cfg.sampler.samples = get_or<std::size_t>(sm, "samples", cfg.sampler.samples);
    cfg.sampler.box = get_or(sm, "box", cfg.sampler.box);
    cfg.sampler.r_max = get_or(sm, "r_max", cfg.sampler.r_max);
    cfg.sampler.seed = get_or<std::uint64_t>(sm, "seed", cfg.sampler.seed);
  }
  cfg.strict = get_or(doc, "strict", false);
  cfg.export_paths = get_or<std::size_t>(doc, "export_paths", cfg.export_paths);
  cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("$", "cannot read scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("$", std::string("malformed JSON in ") + path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace subfbsde::cli
