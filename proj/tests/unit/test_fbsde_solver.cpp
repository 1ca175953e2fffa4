#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "subfbsde/fbsde_solver.hpp"

using namespace subfbsde;

namespace {

const SubordinatorSpec kDrift{1.0, NoJumps{}};
const SubordinatorSpec kJumps{1.0, CompoundPoissonJumps{1.0, FixedJumps{1.0}}};
const TimeGrid kGrid{0.0, 1.0, 100};

// Canonical bundle with a drift-only kappa = 1 clock reduces to
// x' = -2c y, y' = -2c x, y(T) = x(T).
std::vector<oracle::State> canonical_oracle(double c, double x0) {
  return oracle::shoot([c](double, const oracle::State& u) { return oracle::State{-2 * c * u[1], -2 * c * u[0]}; },
                       [](double x) { return x; }, x0, 1.0);
}

double relative_error_vs_oracle(const SolutionTriple& s, const std::vector<oracle::State>& tr) {
  SolutionTriple ref = SolutionTriple::zeros(s.ensemble, s.x0);
  for (std::size_t k = 0; k <= s.n_steps(); ++k) {
    const auto u = oracle::at(tr, 1.0, s.ensemble->grid().time(k));
    for (std::size_t p = 0; p < s.n_paths(); ++p) {
      ref.x(k, p) = u[0];
      ref.y(k, p) = u[1];
    }
  }
  return m_norm_distance(s, ref) / m_norm(ref).value;
}

}  // namespace

TEST_CASE("picard forcings") {
  const auto ens = make_ensemble(kJumps, TimeGrid{0.0, 1.0, 20}, 50, 1.0, 1);
  const auto base = [&] {
    ForcingSet f = ForcingSet::zeros(20, 50);
    for (double& v : f.h0.values()) v = 0.25;
    f.phi0.assign(50, -1.0);
    return f;
  }();
  SolutionTriple theta = SolutionTriple::zeros(ens, 1.0);
  for (std::size_t k = 0; k <= 20; ++k) {
    for (std::size_t p = 0; p < 50; ++p) {
      theta.x(k, p) = ens->X()(k, p);
      theta.y(k, p) = 0.5 * ens->X()(k, p) + ens->R()(k, p);
      theta.z(k, p) = std::sin(ens->X()(k, p));
    }
  }
  const auto B = riccati_test();

  CHECK(picard_forcings(B, theta, 0.0, base) == base);

  const auto zero = picard_forcings(canonical_monotone(0.5), SolutionTriple::zeros(ens), 0.7,
                                    ForcingSet::zeros(20, 50));
  CHECK(zero == ForcingSet::zeros(20, 50));

  const auto f1 = picard_forcings(B, theta, 0.3, ForcingSet::zeros(20, 50));
  const auto f2 = picard_forcings(B, 2.0 * theta, 0.3, ForcingSet::zeros(20, 50));
  CHECK(f2 == 2.0 * f1);

  // formulas, at one point
  const double x = theta.x(5, 7), y = theta.y(5, 7), z = theta.z(5, 7);
  const auto f = picard_forcings(B, theta, 0.3, base);
  CHECK(f.b0(5, 7) == doctest::Approx(0.3 * (y - 0.5 * y)));
  CHECK(f.delta0(5, 7) == doctest::Approx(0.3 * (y - 0.5 * y)));
  CHECK(f.sigma0(5, 7) == doctest::Approx(0.3 * (z - 0.5 * z)));
  CHECK(f.g0(5, 7) == doctest::Approx(0.3 * (1.5 * x - x)));
  CHECK(f.h0(5, 7) == doctest::Approx(0.3 * (1.5 * x - x) + 0.25));
  const double xT = theta.x(20, 7);
  CHECK(f.phi0[7] == doctest::Approx(0.3 * (2 * xT - xT) - 1.0));
}

TEST_CASE("eta = 0 converges in one iteration to the linear solution") {
  const auto ens = make_ensemble(kJumps, kGrid, 2000, 1.0, 2);
  ContinuationConfig cfg;
  const LevelSolver linear = [&](const ForcingSet& f, const SolutionTriple* hint) {
    return solve_linear(f, 1.0, ens, cfg.linear, hint).solution;
  };
  const auto base = ForcingSet::zeros(100, 2000);
  const auto r = solve_level(linear, riccati_test(), 0.0, base, 1.0, ens, cfg);
  CHECK(r.converged);
  CHECK(r.solves == 1);
  CHECK(m_norm_distance(r.solution, solve_linear(base, 1.0, ens).solution) == 0.0);
}

TEST_CASE("the anchor bundle reproduces solve_linear") {
  const auto ens = make_ensemble(kJumps, kGrid, 3000, 1.0, 3);
  const auto res = solve_fbsde(linear_test(), 1.0, ens);
  const auto lin = solve_linear(ForcingSet::zeros(100, 3000), 1.0, ens).solution;
  CHECK_FALSE(res.diagnostics.diverged);
  CHECK(m_norm_distance(res.solution, lin) <= 1e-10);
}

TEST_CASE("canonical bundle, drift-only clock, against the shooting oracle") {
  const auto ens = make_ensemble(kDrift, kGrid, 10000, 1.0, 4);
  for (double c : {1.0, 0.5}) {
    CAPTURE(c);
    const auto res = solve_fbsde(canonical_monotone(c), 1.0, ens);
    CHECK_FALSE(res.diagnostics.diverged);
    CHECK(res.diagnostics.levels.back().converged);
    const auto tr = canonical_oracle(c, 1.0);
    // the oracle is the closed form x = y = x0 e^{-2ct}
    CHECK(tr.back()[0] == doctest::Approx(std::exp(-2 * c)).epsilon(1e-8));
    CHECK(relative_error_vs_oracle(res.solution, tr) <= 0.02);
  }
}

TEST_CASE("Riccati bundle in the deterministic configuration") {
  const auto ens = make_ensemble(kDrift, kGrid, 1, 1.0, 1);
  ContinuationConfig cfg;
  cfg.linear.condexp = CondExpMode::deterministic;
  cfg.picard_tol = 1e-9;
  cfg.max_picard = 80;
  const auto res = solve_fbsde(riccati_test(), 1.0, ens, cfg);
  REQUIRE_FALSE(res.diagnostics.diverged);
  CHECK(res.diagnostics.levels.back().converged);
  for (std::size_t k : {0u, 50u, 90u}) {
    const double t = kGrid.time(k);
    const double P = oracle::riccati_P(2.0, 1.0, t);
    CHECK(res.solution.y(k, 0) / res.solution.x(k, 0) == doctest::Approx(P).epsilon(0.02));
  }
  // terminal condition y_T = 2 x_T up to the Picard tolerance
  CHECK(std::abs(res.solution.y(100, 0) - 2 * res.solution.x(100, 0)) <= 1e-6);
}

TEST_CASE("contraction from the anchor with step eta0") {
  const auto ens = make_ensemble(kJumps, kGrid, 4000, 1.0, 5);
  const auto B = canonical_monotone(0.5);
  ContinuationConfig cfg;
  cfg.picard_tol = 1e-14;
  cfg.max_picard = 6;
  const double eta = eta0(B.lipschitz, B.monotonicity, 1.0, 1.0, default_c1(B.lipschitz)).value;
  const LevelSolver linear = [&](const ForcingSet& f, const SolutionTriple* hint) {
    return solve_linear(f, 1.0, ens, cfg.linear, hint).solution;
  };
  const auto r = solve_level(linear, B, eta, ForcingSet::zeros(100, 4000), 1.0, ens, cfg);
  REQUIRE(r.residuals.size() >= 4);
  const auto ratios = successive_ratios(r.residuals);
  for (std::size_t i = 1; i < ratios.size(); ++i) CHECK(ratios[i] <= 0.5);
  CHECK(contraction_fit(r.residuals) <= 0.5);
}

TEST_CASE("flatten contraction on the canonical bundle") {
  const auto ens = make_ensemble(kDrift, kGrid, 1, 1.0, 1);
  ContinuationConfig cfg;
  cfg.linear.condexp = CondExpMode::deterministic;
  cfg.picard_tol = 1e-12;
  const auto res = solve_fbsde(canonical_monotone(0.5), 1.0, ens, cfg);
  const auto& lvl = res.diagnostics.levels.back();
  REQUIRE(lvl.fitted_ratio.has_value());
  CHECK(*lvl.fitted_ratio <= 0.30);
  CHECK(res.diagnostics.linear_solves == lvl.residuals.size());
}

TEST_CASE("divergence demo is flagged with its level") {
  const auto ens = make_ensemble(kDrift, kGrid, 500, 1.0, 6);
  const auto res = solve_fbsde(divergence_demo(), 1.0, ens);
  CHECK(res.diagnostics.diverged);
  CHECK(res.diagnostics.divergence_message.find("alpha0=0") != std::string::npos);
  CHECK(res.diagnostics.divergence_message.find("eta=1") != std::string::npos);
  CHECK_FALSE(res.diagnostics.warnings.empty());  // hypothesis warning
  REQUIRE(res.diagnostics.hypothesis.has_value());
  CHECK_FALSE(res.diagnostics.hypothesis->verdict.phi_monotone);
}

TEST_CASE("uniqueness probe: two Picard seeds reach the same solution") {
  const auto ens = make_ensemble(kJumps, kGrid, 4000, 1.0, 7);
  const auto B = canonical_monotone(0.5);
  ContinuationConfig cfg;
  SolutionTriple seed = SolutionTriple::zeros(ens, 1.0);
  for (std::size_t k = 0; k <= 100; ++k) {
    for (std::size_t p = 0; p < 4000; ++p) {
      seed.x(k, p) = 0.5 + ens->X()(k, p);
      seed.y(k, p) = -1.0;
      seed.z(k, p) = 0.3;
    }
  }
  const auto a = solve_fbsde(B, 1.0, ens, cfg);
  const auto b = solve_fbsde(B, 1.0, ens, cfg, &seed);
  REQUIRE((a.diagnostics.levels.back().converged && b.diagnostics.levels.back().converged));
  CHECK(m_norm_distance(a.solution, b.solution) <= 2 * cfg.picard_tol * m_norm(a.solution).value);
}

TEST_CASE("degenerate clock equals the classical Brownian engine bit for bit") {
  const TimeGrid grid{0.1, 1.0, 50};
  const auto a = make_ensemble(kDrift, grid, 1000, 1.0, 8);
  const auto b = make_brownian_ensemble(1.0, grid, 1000, 1.0, 8);
  const auto ra = solve_fbsde(canonical_monotone(0.5), 1.0, a);
  const auto rb = solve_fbsde(canonical_monotone(0.5), 1.0, b);
  CHECK(ra.solution.x == rb.solution.x);
  CHECK(ra.solution.y == rb.solution.y);
  CHECK(ra.solution.z == rb.solution.z);
}

TEST_CASE("a priori ratio is stable under doubling x0") {
  const auto ens = make_ensemble(kJumps, kGrid, 3000, 1.0, 9);
  std::vector<double> ratios;
  for (double x0 : {1.0, 2.0, 4.0}) {
    const auto res = solve_fbsde(canonical_monotone(0.5), x0, ens);
    REQUIRE(res.diagnostics.apriori.has_value());
    ratios.push_back(res.diagnostics.apriori->ratio);
  }
  for (double r : ratios) CHECK(std::abs(r / ratios[0] - 1.0) <= 0.25);
}

TEST_CASE("terminal condition holds pathwise") {
  const auto ens = make_ensemble(kJumps, kGrid, 2000, 1.0, 10);
  ContinuationConfig cfg;
  const auto B = canonical_monotone(0.5);
  const auto res = solve_fbsde(B, 1.0, ens, cfg);
  double worst = 0.0;
  for (std::size_t p = 0; p < 2000; ++p) {
    worst = std::max(worst, std::abs(res.solution.y(100, p) - B.phi(ens->state(100, p), res.solution.x(100, p))));
  }
  CHECK(worst <= cfg.picard_tol);
}

TEST_CASE("increasing-orientation bundles are solved through the mirror") {
  const auto ens = make_ensemble(kJumps, kGrid, 2000, 1.0, 11);
  const auto hp1 = solve_fbsde(canonical_monotone(0.5), 1.0, ens);
  const auto hp2 = solve_fbsde(canonical_flipped_hp2(0.5), 1.0, ens);
  CHECK_FALSE(hp2.diagnostics.diverged);
  CHECK(hp2.solution.x == hp1.solution.x);
  CHECK(hp2.solution.y == -1.0 * hp1.solution.y);
  CHECK(hp2.diagnostics.warnings.empty());
}

TEST_CASE("nested ladder") {
  const auto ens = make_ensemble(kDrift, kGrid, 1, 1.0, 1);
  ContinuationConfig cfg;
  cfg.linear.condexp = CondExpMode::deterministic;
  cfg.picard_tol = 1e-8;
  cfg.strategy = Strategy::nested;
  cfg.eta = 0.5;
  const auto nested = solve_fbsde(canonical_monotone(0.5), 1.0, ens, cfg);
  REQUIRE(nested.diagnostics.levels.size() == 2);
  CHECK(nested.diagnostics.levels[0].alpha0 == 0.0);
  CHECK(nested.diagnostics.levels[1].alpha0 == 0.5);
  CHECK(nested.diagnostics.levels[0].invocations > 1);

  cfg.strategy = Strategy::flatten;
  const auto flat = solve_fbsde(canonical_monotone(0.5), 1.0, ens, cfg);
  CHECK(m_norm_distance(nested.solution, flat.solution) <= 1e-6);
  CHECK(nested.diagnostics.linear_solves > flat.diagnostics.linear_solves);

  cfg.strategy = Strategy::nested;
  cfg.eta = 0.1;
  CHECK_THROWS_AS(solve_fbsde(canonical_monotone(0.5), 1.0, ens, cfg), std::invalid_argument);
  cfg.eta.reset();
  const auto dflt = solve_fbsde(canonical_monotone(0.5), 1.0, ens, cfg);
  CHECK(dflt.diagnostics.ladder_step == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(dflt.diagnostics.warnings.empty());
}

TEST_CASE("config validation") {
  ContinuationConfig cfg;
  cfg.eta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.eta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.eta.reset();
  cfg.picard_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
