#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "scenario.hpp"
#include "schema.hpp"

using namespace subfbsde::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("subfbsde_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json scenario(const std::string& file) {
  std::ifstream in(fs::path(SUBFBSDE_SCENARIO_DIR) / file);
  REQUIRE(in);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // comment line
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

json small(json doc) {
  doc["n_paths"] = 400;
  doc["n_steps"] = 20;
  return doc;
}

}  // namespace

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("embedded schema is the published docs file") {
  std::ifstream in(fs::path(SUBFBSDE_SCENARIO_DIR) / ".." / ".." / "docs" / "scenario.schema.json");
  REQUIRE(in);
  CHECK(json::parse(in) == scenario_schema());
}

TEST_CASE("every shipped scenario validates") {
  for (const auto& entry : fs::directory_iterator(SUBFBSDE_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    CHECK_NOTHROW(load_scenario(entry.path()));
  }
}

TEST_CASE("sample-clock on a drift-only scenario has L equal to t") {
  const auto dir = scratch_dir("clock");
  const auto out = run("sample-clock", scenario("drift_clock.json"), {dir, nullptr});
  REQUIRE(out.exit_code == kExitOk);
  REQUIRE(out.artifacts.size() == 2);
  std::string header;
  const auto rows = csv_rows(dir / "drift_clock_sample-clock_7.csv", &header);
  CHECK(header == "path_id,t,L,R");
  REQUIRE(rows.size() == 3 * 51);
  for (const auto& r : rows) {
    CHECK(r[2] == r[1]);
    CHECK(r[3] == 0.0);
  }
  const auto summary = json::parse(slurp(dir / "drift_clock_sample-clock_7.json"))["summary"];
  CHECK(summary["invariant_ok"] == true);
  CHECK(summary["frozen_step_fraction"] == 0.0);
}

TEST_CASE("sample-subdiffusion writes X alongside the clock") {
  const auto dir = scratch_dir("subdiff");
  auto doc = scenario("stable_clock.json");
  doc["n_paths"] = 500;
  const auto out = run("sample-subdiffusion", doc, {dir, nullptr});
  REQUIRE(out.exit_code == kExitOk);
  std::string header;
  const auto rows = csv_rows(dir / "stable_clock_sample-subdiffusion_9.csv", &header);
  CHECK(header == "path_id,t,L,R,X");
  CHECK(rows.size() == 4 * 101);
  const auto summary = json::parse(slurp(dir / "stable_clock_sample-subdiffusion_9.json"))["summary"];
  CHECK(summary["flat_violations"] == 0);
}

TEST_CASE("check-hypothesis on the flipped bundle with increasing orientation passes") {
  const auto dir = scratch_dir("hp2");
  const auto out = run("check-hypothesis", scenario("flipped_hp2.json"), {dir, nullptr});
  CHECK(out.exit_code == kExitOk);
  const auto doc = json::parse(slurp(dir / "flipped_hp2_check-hypothesis_3.json"));
  CHECK(doc["hypothesis"]["pass"] == true);
}

TEST_CASE("strict check-hypothesis exits 4 when the declared orientation is wrong") {
  const auto dir = scratch_dir("hp2_bad");
  auto doc = scenario("flipped_hp2.json");
  doc["orientation"] = "decreasing";
  const auto out = run("check-hypothesis", doc, {dir, nullptr});
  CHECK(out.exit_code == kExitHypothesis);
  const auto report = json::parse(slurp(dir / "flipped_hp2_check-hypothesis_3.json"));
  CHECK(report["hypothesis"]["pass"] == false);
  CHECK(report["hypothesis"]["violations"].contains("m1"));

  doc["strict"] = false;
  CHECK(run("check-hypothesis", doc, {dir, nullptr}).exit_code == kExitOk);
}

TEST_CASE("solve with eta = 1 on the divergence demo exits 3 and still writes diagnostics") {
  const auto dir = scratch_dir("diverge");
  const auto out = run("solve", scenario("divergence_demo.json"), {dir, nullptr});
  CHECK(out.exit_code == kExitDiverged);
  CHECK(out.message.find("DIVERGED") != std::string::npos);
  const auto p = dir / "divergence_demo_solve_5.json";
  REQUIRE(fs::exists(p));
  const auto diag = json::parse(slurp(p))["diagnostics"];
  CHECK(diag["diverged"] == true);
  CHECK(diag["message"].get<std::string>().find("alpha0") != std::string::npos);
}

TEST_CASE("solve writes the solution CSV and the diagnostics JSON contract") {
  const auto dir = scratch_dir("solve");
  auto doc = small(scenario("canonical_drift.json"));
  const auto out = run("solve", doc, {dir, nullptr});
  REQUIRE(out.exit_code == kExitOk);
  std::string header;
  const auto rows = csv_rows(dir / "canonical_drift_solve_11.csv", &header);
  CHECK(header == "t,mean_x,mean_y,mean_z,sd_x,sd_y");
  CHECK(rows.size() == 21);
  CHECK(rows.front()[1] == doctest::Approx(1.0));
  const auto diag = json::parse(slurp(dir / "canonical_drift_solve_11.json"))["diagnostics"];
  CHECK(diag.contains("m_norm"));
  CHECK(diag["m_norm"].contains("parts"));
  CHECK(diag["contraction"].contains("ratios"));
  CHECK(diag["contraction"].contains("fit"));
  CHECK(diag["apriori"].contains("se"));
  CHECK(diag["diverged"] == false);
}

TEST_CASE("diagnose adds the hypothesis report to the diagnostics") {
  const auto dir = scratch_dir("diagnose");
  const auto out = run("diagnose", small(scenario("canonical_drift.json")), {dir, nullptr});
  REQUIRE(out.exit_code == kExitOk);
  REQUIRE(out.artifacts.size() == 1);
  const auto diag = json::parse(slurp(out.artifacts.front()));
  CHECK(diag["hypothesis"]["pass"] == true);
  CHECK(diag["m_norm"].contains("variant"));
}

TEST_CASE("solve-linear summary carries norms and the a-priori ratio") {
  const auto dir = scratch_dir("linear");
  const auto out = run("solve-linear", small(scenario("linear_forced.json")), {dir, nullptr});
  REQUIRE(out.exit_code == kExitOk);
  const auto summary = json::parse(slurp(dir / "linear_forced_solve-linear_21.json"))["summary"];
  CHECK(summary["m_norm"]["value"].get<double>() > 0.0);
  CHECK(summary["apriori"]["ratio"].get<double>() > 0.0);
}

TEST_CASE("identical config and seed give byte-identical artifacts") {
  for (const char* sub : {"sample-subdiffusion", "solve"}) {
    INFO(sub);
    auto doc = small(scenario("canonical_jump.json"));
    const auto a = run(sub, doc, {scratch_dir("rerun_a"), nullptr});
    const auto b = run(sub, doc, {scratch_dir("rerun_b"), nullptr});
    REQUIRE(a.exit_code == kExitOk);
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
      CHECK(a.artifacts[i].filename() == b.artifacts[i].filename());
      CHECK(slurp(a.artifacts[i]) == slurp(b.artifacts[i]));
    }
  }
}

TEST_CASE("artifacts embed the config hash and seed") {
  const auto dir = scratch_dir("hash");
  const auto doc = scenario("drift_clock.json");
  const auto out = run("sample-clock", doc, {dir, nullptr});
  REQUIRE(out.exit_code == kExitOk);
  char hex[19];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));

  std::ifstream csv(dir / "drift_clock_sample-clock_7.csv");
  std::string first;
  std::getline(csv, first);
  CHECK(first.find(std::string("config_hash=") + hex) != std::string::npos);
  CHECK(first.find("seed=7") != std::string::npos);

  const auto j = json::parse(slurp(dir / "drift_clock_sample-clock_7.json"));
  CHECK(j["config_hash"] == hex);
  CHECK(j["seed"] == 7);

  auto other = doc;
  other["n_steps"] = 51;
  CHECK(fnv1a(other.dump()) != fnv1a(doc.dump()));
}

TEST_CASE("validation errors exit 2 and name the key") {
  const auto dir = scratch_dir("invalid");
  const auto base = scenario("drift_clock.json");
  const auto expect = [&](json doc, const std::string& key) {
    const auto out = run("sample-clock", doc, {dir, nullptr});
    INFO(out.message);
    CHECK(out.exit_code == kExitValidation);
    CHECK(out.message.find(key) != std::string::npos);
    CHECK(out.artifacts.empty());
  };

  auto missing_seed = base;
  missing_seed.erase("seed");
  expect(missing_seed, "seed");

  auto bad_kappa = base;
  bad_kappa["kappa"] = -1.0;
  expect(bad_kappa, "kappa");

  auto typo = base;
  typo["n_path"] = 10;
  expect(typo, "n_path");

  auto bad_kind = base;
  bad_kind["jump_kind"] = "gamma";
  expect(bad_kind, "jump_kind");

  auto delay = base;
  delay["a"] = 2.0;
  expect(delay, "T");

  auto bundle = base;
  bundle["bundle"] = "no_such_bundle";
  expect(bundle, "bundle");

  auto degree = base;
  degree["basis"] = {{"degree", 9}};
  expect(degree, "degree");

  auto eta = base;
  eta["eta"] = 0.0;
  expect(eta, "eta");

  CHECK(run("no-such-command", base, {dir, nullptr}).exit_code == kExitValidation);
  CHECK(run("sample-clock", fs::path(dir / "missing.json"), {dir, nullptr}).exit_code == kExitValidation);
}
