#include <doctest.h>

#include <vector>

#include "stats.hpp"
#include "subfbsde/subdiffusion.hpp"

using namespace subfbsde;

TEST_CASE("flatness and pathwise consistency") {
  const SubordinatorSpec spec{1.0, CompoundPoissonJumps{3.0, ExponentialJumps{0.2}}};
  const TimeGrid grid{0.1, 1.0, 50};
  const auto paths = sample_subdiffusion(sample_clock_ensemble(spec, grid, 500, 4), 0.7, 4);
  std::size_t frozen = 0;
  for (const auto& p : paths) {
    REQUIRE(p.X[0] == 0.7);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      if (p.clock.dL[k] == 0.0) {
        ++frozen;
        REQUIRE(p.dB[k] == 0.0);
        REQUIRE(p.X[k + 1] == p.X[k]);
      }
      REQUIRE(p.X[k + 1] == p.X[k] + p.dB[k]);
    }
  }
  CHECK(frozen > 0);
}

TEST_CASE("mismatched grids are rejected") {
  auto a = sample_clock_ensemble(SubordinatorSpec{1.0}, TimeGrid{0.0, 1.0, 10}, 1, 1);
  auto b = sample_clock_ensemble(SubordinatorSpec{1.0}, TimeGrid{0.0, 1.0, 20}, 1, 1);
  a.push_back(b.front());
  CHECK_THROWS_AS(sample_subdiffusion(a, 0.0, 1), std::invalid_argument);
}

TEST_CASE("markov_state") {
  const SubordinatorSpec spec{1.0};
  const TimeGrid grid{0.25, 1.0, 20};
  const auto paths = sample_subdiffusion(sample_clock_ensemble(spec, grid, 1, 1), 2.0, 1);
  const auto s0 = markov_state(paths[0], 0);
  CHECK(s0.x == 2.0);
  CHECK(s0.r == 0.25);
  for (std::size_t k = 5; k <= 20; ++k) CHECK(markov_state(paths[0], k).r == 0.0);
  CHECK_THROWS_AS(markov_state(paths[0], 21), std::out_of_range);
}

TEST_CASE("markov_state on the single-jump clock at t = 1") {
  // kappa = 0.5, jump of size 2 at r = 1 (see the clock tests)
  SubordinatorSkeleton sk{SubordinatorSpec{0.5, CompoundPoissonJumps{1.0, FixedJumps{2.0}}}, 3.0, {1.0}, {2.0}};
  const TimeGrid grid{0.0, 3.0, 30};
  const auto paths = sample_subdiffusion({invert_clock(sk, grid)}, 0.0, 9);
  CHECK(markov_state(paths[0], 10).r == doctest::Approx(1.5));
}

TEST_CASE("drift-only kappa 1: Brownian variance at interior times and martingale mean") {
  const TimeGrid grid{0.0, 1.0, 100};
  const auto ens = make_ensemble(SubordinatorSpec{1.0}, grid, 100000, 0.0, 21);
  for (std::size_t k : {25u, 50u, 100u}) {
    const auto x = ens->X().slice(k);
    std::vector<double> sq(x.size());
    for (std::size_t p = 0; p < x.size(); ++p) sq[p] = x[p] * x[p];
    const auto m = stats::mean_se(sq);
    CHECK(std::abs(m.mean - grid.time(k)) <= 3 * m.se);
    const auto mx = stats::mean_se(std::vector<double>(x.begin(), x.end()));
    CHECK(std::abs(mx.mean) <= 3 * mx.se);
  }
}

TEST_CASE("jump clock: Var(X_T - x0) and quadratic variation track E[L_T]") {
  const SubordinatorSpec spec{1.0, CompoundPoissonJumps{1.0, FixedJumps{1.0}}};
  const TimeGrid grid{0.0, 1.0, 50};
  const std::size_t n = 40000;
  const auto ens = make_ensemble(spec, grid, n, 1.0, 8);
  std::vector<double> inc2(n), LT(n), qv_minus_L(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double d = ens->X()(grid.n_steps, p) - 1.0;
    inc2[p] = d * d;
    LT[p] = ens->L()(grid.n_steps, p);
    double qv = 0.0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) qv += ens->dB()(k, p) * ens->dB()(k, p);
    qv_minus_L[p] = qv - LT[p];
  }
  const auto mL = stats::mean_se(LT);
  const auto mv = stats::mean_se(inc2);
  const auto mq = stats::mean_se(qv_minus_L);
  CHECK(std::abs(mv.mean - mL.mean) <= 3 * std::hypot(mv.se, mL.se));
  CHECK(std::abs(mq.mean) <= 3 * mq.se);
  CHECK(mL.mean < 1.0);  // the clock runs slower than real time
}

TEST_CASE("Brownian ensemble shares streams with the drift-only sub-diffusion") {
  const TimeGrid grid{0.2, 1.0, 40};
  const auto a = make_ensemble(SubordinatorSpec{2.0}, grid, 64, 0.5, 3);
  const auto b = make_brownian_ensemble(2.0, grid, 64, 0.5, 3);
  CHECK(a->dB() == b->dB());
  CHECK(a->X() == b->X());
  CHECK(a->R() == b->R());
}
