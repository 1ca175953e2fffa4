#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>

#include "scenario.hpp"
#include "subfbsde/clock.hpp"
#include "subfbsde/diagnostics.hpp"
#include "subfbsde/fbsde_solver.hpp"
#include "subfbsde/linear_solver.hpp"
#include "subfbsde/subdiffusion.hpp"

namespace subfbsde::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON cannot hold NaN or infinity; both become null rather than invalid output.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json num_array(std::span<const double> v) {
  json out = json::array();
  for (double d : v) out.push_back(num(d));
  return out;
}

class Artifacts {
 public:
  Artifacts(const ScenarioConfig& cfg, std::string subcommand, fs::path dir)
      : cfg_(cfg), subcommand_(std::move(subcommand)), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  fs::path path(const char* ext) const {
    return dir_ / (cfg_.scenario + "_" + subcommand_ + "_" + std::to_string(cfg_.seed) + ext);
  }

  json header() const {
    return {{"scenario", cfg_.scenario},
            {"subcommand", subcommand_},
            {"seed", cfg_.seed},
            {"config_hash", cfg_.hash_hex()},
            {"config", cfg_.raw}};
  }

  void write_json(json body) {
    json doc = header();
    doc.update(body);
    const auto p = path(".json");
    std::ofstream out(p, std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + p.string());
    written_.push_back(p);
  }

  /// `rows` receives a line sink; each call appends one CSV row.
  void write_csv(const std::string& columns, const std::function<void(std::ostream&)>& rows) {
    const auto p = path(".csv");
    std::ofstream out(p, std::ios::binary);
    out << "# scenario=" << cfg_.scenario << " subcommand=" << subcommand_ << " seed=" << cfg_.seed
        << " config_hash=" << cfg_.hash_hex() << '\n'
        << columns << '\n';
    rows(out);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    written_.push_back(p);
  }

  std::vector<fs::path> written_;

 private:
  const ScenarioConfig& cfg_;
  std::string subcommand_;
  fs::path dir_;
};

struct MeanSe {
  double mean = 0.0, var = 0.0, se = 0.0;
};

MeanSe moments(std::span<const double> v) {
  MeanSe m;
  if (v.empty()) return m;
  for (double d : v) m.mean += d;
  m.mean /= static_cast<double>(v.size());
  for (double d : v) m.var += (d - m.mean) * (d - m.mean);
  if (v.size() > 1) m.var /= static_cast<double>(v.size() - 1);
  m.se = std::sqrt(m.var / static_cast<double>(v.size()));
  return m;
}

json tuple_json(const HypothesisTuple& t) {
  return {{"t", t.t}, {"x", t.state.x}, {"r", t.state.r}, {"x1", t.x1}, {"x2", t.x2},
          {"y1", t.y1}, {"y2", t.y2}, {"z1", t.z1}, {"z2", t.z2}};
}

json hypothesis_json(const HypothesisReport& r) {
  json j = {{"pass", r.verdict.all()},
            {"verdict",
             {{"lipschitz", r.verdict.lipschitz},
              {"m1", r.verdict.m1},
              {"m2", r.verdict.m2},
              {"phi_monotone", r.verdict.phi_monotone}}},
            {"lipschitz_estimate", num(r.lipschitz_estimate)},
            {"m1_margin", num(r.m1_margin)},
            {"m2_margin", num(r.m2_margin)},
            {"samples_used", r.samples_used}};
  json violations = json::object();
  if (r.lipschitz_violation) violations["lipschitz"] = tuple_json(*r.lipschitz_violation);
  if (r.m1_violation) violations["m1"] = tuple_json(*r.m1_violation);
  if (r.m2_violation) violations["m2"] = tuple_json(*r.m2_violation);
  if (r.phi_violation) violations["phi_monotone"] = tuple_json(*r.phi_violation);
  j["violations"] = violations;
  return j;
}

json m_norm_json(const MNormValue& m) {
  return {{"value", num(m.value)},
          {"parts", {{"x0", num(m.x0_part)}, {"dt", num(m.dt_part)}, {"dL", num(m.dL_part)}}}};
}

json ratio_json(const RatioReport& r) {
  return {{"lhs", num(r.lhs)},     {"rhs", num(r.rhs)},           {"ratio", num(r.ratio)},
          {"se", num(r.ratio_se)}, {"lhs_se", num(r.lhs_se)},     {"degenerate", r.degenerate},
          {"violation", r.violation}};
}

void write_solution_csv(Artifacts& art, const SolutionTriple& s) {
  const auto& grid = s.ensemble->grid();
  art.write_csv("t,mean_x,mean_y,mean_z,sd_x,sd_y", [&](std::ostream& out) {
    for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
      const auto mx = moments(s.x.slice(k));
      const auto my = moments(s.y.slice(k));
      const auto mz = moments(s.z.slice(k));
      out << fmt(grid.time(k)) << ',' << fmt(mx.mean) << ',' << fmt(my.mean) << ',' << fmt(mz.mean) << ','
          << fmt(std::sqrt(mx.var)) << ',' << fmt(std::sqrt(my.var)) << '\n';
    }
  });
}

std::shared_ptr<const PathEnsemble> build_ensemble(const ScenarioConfig& cfg) {
  return make_ensemble(cfg.spec, cfg.grid, cfg.n_paths, cfg.x0, cfg.seed);
}

int cmd_sample_clock(const ScenarioConfig& cfg, Artifacts& art) {
  const auto clocks = sample_clock_ensemble(cfg.spec, cfg.grid, cfg.n_paths, cfg.seed);
  std::size_t violations = 0, frozen = 0, steps = 0;
  double max_ratio = 0.0;
  std::vector<double> LT;
  LT.reserve(clocks.size());
  for (const auto& c : clocks) {
    const double bound = c.max_increment();
    for (double d : c.dL) {
      if (!(d >= 0.0 && d <= bound)) ++violations;
      if (d == 0.0) ++frozen;
      max_ratio = std::max(max_ratio, d / bound);
      ++steps;
    }
    LT.push_back(c.L.back());
  }
  const std::size_t n_export = std::min(cfg.export_paths, clocks.size());
  art.write_csv("path_id,t,L,R", [&](std::ostream& out) {
    for (std::size_t p = 0; p < n_export; ++p) {
      const auto& c = clocks[p];
      for (std::size_t k = 0; k < cfg.grid.n_nodes(); ++k) {
        out << p << ',' << fmt(cfg.grid.time(k)) << ',' << fmt(c.L[k]) << ',' << fmt(c.R[k]) << '\n';
      }
    }
  });
  const auto m = moments(LT);
  art.write_json({{"summary",
                   {{"n_paths", clocks.size()},
                    {"exported_paths", n_export},
                    {"increment_bound", cfg.grid.dt() / cfg.spec.kappa},
                    {"max_increment_over_bound", max_ratio},
                    {"invariant_violations", violations},
                    {"invariant_ok", violations == 0},
                    {"frozen_step_fraction", steps ? static_cast<double>(frozen) / static_cast<double>(steps) : 0.0},
                    {"mean_L_T", m.mean},
                    {"se_L_T", m.se}}}});
  return kExitOk;
}

int cmd_sample_subdiffusion(const ScenarioConfig& cfg, Artifacts& art) {
  auto clocks = sample_clock_ensemble(cfg.spec, cfg.grid, cfg.n_paths, cfg.seed);
  const auto paths = sample_subdiffusion(std::move(clocks), cfg.x0, cfg.seed);
  std::size_t flat_violations = 0;
  std::vector<double> XT, QV, LT;
  for (const auto& p : paths) {
    double qv = 0.0;
    for (std::size_t k = 0; k < p.dB.size(); ++k) {
      if (p.clock.dL[k] == 0.0 && p.dB[k] != 0.0) ++flat_violations;
      qv += p.dB[k] * p.dB[k];
    }
    XT.push_back(p.X.back());
    QV.push_back(qv);
    LT.push_back(p.clock.L.back());
  }
  const std::size_t n_export = std::min(cfg.export_paths, paths.size());
  art.write_csv("path_id,t,L,R,X", [&](std::ostream& out) {
    for (std::size_t i = 0; i < n_export; ++i) {
      const auto& p = paths[i];
      for (std::size_t k = 0; k < cfg.grid.n_nodes(); ++k) {
        out << i << ',' << fmt(cfg.grid.time(k)) << ',' << fmt(p.clock.L[k]) << ',' << fmt(p.clock.R[k]) << ','
            << fmt(p.X[k]) << '\n';
      }
    }
  });
  const auto mx = moments(XT), mq = moments(QV), ml = moments(LT);
  art.write_json({{"summary",
                   {{"n_paths", paths.size()},
                    {"exported_paths", n_export},
                    {"flat_violations", flat_violations},
                    {"mean_X_T", mx.mean},
                    {"var_X_T", mx.var},
                    {"mean_quadratic_variation", mq.mean},
                    {"se_quadratic_variation", mq.se},
                    {"mean_L_T", ml.mean},
                    {"se_L_T", ml.se}}}});
  return kExitOk;
}

int cmd_check_hypothesis(const ScenarioConfig& cfg, Artifacts& art, std::string& message) {
  const auto report = check_hypothesis(cfg.bundle(), cfg.sampler);
  art.write_json({{"hypothesis", hypothesis_json(report)}, {"strict", cfg.strict}});
  if (!report.verdict.all()) {
    message = "hypothesis check failed for bundle " + cfg.bundle_name;
    if (cfg.strict) return kExitHypothesis;
  }
  return kExitOk;
}

int cmd_solve_linear(const ScenarioConfig& cfg, Artifacts& art) {
  const auto ens = build_ensemble(cfg);
  ForcingSet f = ForcingSet::zeros(ens->n_steps(), ens->n_paths());
  const auto fill = [](Field& field, double v) { std::fill(field.values().begin(), field.values().end(), v); };
  fill(f.b0, cfg.forcings.b0);
  fill(f.g0, cfg.forcings.g0);
  fill(f.delta0, cfg.forcings.delta0);
  fill(f.h0, cfg.forcings.h0);
  fill(f.sigma0, cfg.forcings.sigma0);
  std::fill(f.phi0.begin(), f.phi0.end(), cfg.forcings.phi0);

  const auto result = solve_linear(f, cfg.x0, ens, cfg.solver.linear);
  write_solution_csv(art, result.solution);
  const auto y0 = moments(result.solution.y.slice(0));
  const auto xi = moments(result.workspace.xi);
  art.write_json({{"summary",
                   {{"m_norm", m_norm_json(m_norm(result.solution))},
                    {"variant_m_norm", num(variant_m_norm(result.solution))},
                    {"apriori", ratio_json(apriori_linear_check(result.solution, f, cfg.x0))},
                    {"y0", num(y0.mean)},
                    {"xi_mean", num(xi.mean)},
                    {"xi_se", num(xi.se)}}}});
  return kExitOk;
}

json levels_json(const SolveDiagnostics& d) {
  json levels = json::array();
  for (const auto& l : d.levels) {
    levels.push_back({{"alpha0", l.alpha0},
                      {"eta", l.eta},
                      {"residuals", num_array(l.residuals)},
                      {"ratios", num_array(successive_ratios(l.residuals))},
                      {"fitted_ratio", l.fitted_ratio ? num(*l.fitted_ratio) : json(nullptr)},
                      {"converged", l.converged},
                      {"invocations", l.invocations}});
  }
  return levels;
}

json diagnostics_json(const FbsdeResult& r) {
  const auto& d = r.diagnostics;
  // The contraction summary reports the level with the most Picard iterations.
  std::vector<double> residuals;
  for (const auto& l : d.levels) {
    if (l.residuals.size() > residuals.size()) residuals = l.residuals;
  }
  json fit = nullptr;
  if (std::count_if(residuals.begin(), residuals.end(), [](double v) { return v > 0.0; }) >= 3) {
    fit = num(contraction_fit(residuals));
  }
  json j = {{"m_norm", m_norm_json(m_norm(r.solution))},
            {"contraction", {{"residuals", num_array(residuals)}, {"ratios", num_array(successive_ratios(residuals))},
                             {"fit", fit}}},
            {"apriori", d.apriori ? ratio_json(*d.apriori) : json(nullptr)},
            {"diverged", d.diverged},
            {"message", d.divergence_message},
            {"levels", levels_json(d)},
            {"eta0",
             {{"value", d.eta0.value},
              {"forward_bound", d.eta0.forward_bound},
              {"monotone_bound", d.eta0.monotone_bound}}},
            {"ladder_step", d.ladder_step},
            {"linear_solves", d.linear_solves},
            {"warnings", d.warnings}};
  return j;
}

int cmd_solve(const ScenarioConfig& cfg, Artifacts& art, bool full, std::string& message) {
  const auto bundle = cfg.bundle();
  std::optional<HypothesisReport> checked;
  if (cfg.strict || full) {
    checked = check_hypothesis(bundle, cfg.sampler);
    if (cfg.strict && !checked->verdict.all()) {
      message = "hypothesis check failed for bundle " + cfg.bundle_name + "; solve skipped (strict)";
      art.write_json({{"hypothesis", hypothesis_json(*checked)}, {"diverged", false}, {"message", message}});
      return kExitHypothesis;
    }
  }
  ContinuationConfig solver = cfg.solver;
  if (checked) solver.check_hypothesis = false;

  const auto ens = build_ensemble(cfg);
  const auto result = solve_fbsde(bundle, cfg.x0, ens, solver);
  json diag = diagnostics_json(result);
  if (checked) {
    diag["hypothesis"] = hypothesis_json(*checked);
  }
  if (full) {
    diag["m_norm"]["variant"] = num(variant_m_norm(result.solution));
    const auto y0 = moments(result.solution.y.slice(0));
    diag["y0"] = {{"mean", num(y0.mean)}, {"se", num(y0.se)}};
    art.write_json(diag);
  } else {
    write_solution_csv(art, result.solution);
    art.write_json({{"diagnostics", diag}});
  }
  if (result.diagnostics.diverged) {
    message = result.diagnostics.divergence_message;
    return kExitDiverged;
  }
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"sample-clock", "sample-subdiffusion", "check-hypothesis",
                                                 "solve-linear", "solve", "diagnose"};
  return names;
}

RunOutcome run(std::string_view subcommand, const json& config, const RunOptions& options) {
  RunOutcome out;
  const auto report = [&](int code, std::string msg) {
    out.exit_code = code;
    out.message = std::move(msg);
    if (options.log && !out.message.empty()) *options.log << out.message << '\n';
    return out;
  };
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    return report(kExitValidation, "unknown subcommand '" + std::string(subcommand) + "'");
  }

  ScenarioConfig cfg;
  try {
    cfg = parse_scenario(config);
    cfg.solver.validate();
  } catch (const ValidationError& e) {
    return report(kExitValidation, std::string("invalid config (") + e.key() + "): " + e.what());
  } catch (const std::exception& e) {
    return report(kExitValidation, std::string("invalid config: ") + e.what());
  }

  const fs::path dir = options.output_dir ? *options.output_dir : fs::path(cfg.output_dir);
  std::string message;
  int code = kExitOk;
  try {
    Artifacts art(cfg, std::string(subcommand), dir);
    try {
      if (subcommand == "sample-clock") {
        code = cmd_sample_clock(cfg, art);
      } else if (subcommand == "sample-subdiffusion") {
        code = cmd_sample_subdiffusion(cfg, art);
      } else if (subcommand == "check-hypothesis") {
        code = cmd_check_hypothesis(cfg, art, message);
      } else if (subcommand == "solve-linear") {
        code = cmd_solve_linear(cfg, art);
      } else {
        code = cmd_solve(cfg, art, subcommand == "diagnose", message);
      }
    } catch (...) {
      out.artifacts = art.written_;
      throw;
    }
    out.artifacts = art.written_;
  } catch (const std::invalid_argument& e) {
    // Raised by the solvers for unusable settings such as an eta needing too many levels.
    return report(kExitValidation, std::string("invalid config: ") + e.what());
  } catch (const std::exception& e) {
    return report(kExitFailure, std::string("error: ") + e.what());
  }
  return report(code, message);
}

RunOutcome run(std::string_view subcommand, const fs::path& config_path, const RunOptions& options) {
  std::ifstream in(config_path);
  if (!in) {
    RunOutcome out{kExitValidation, {}, "cannot read scenario file " + config_path.string()};
    if (options.log) *options.log << out.message << '\n';
    return out;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    RunOutcome out{kExitValidation, {}, "malformed JSON in " + config_path.string() + ": " + e.what()};
    if (options.log) *options.log << out.message << '\n';
    return out;
  }
  return run(subcommand, doc, options);
}

}  // namespace subfbsde::cli
