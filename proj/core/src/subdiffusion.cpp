#include "subfbsde/subdiffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace subfbsde {

std::vector<SubDiffusionPath> sample_subdiffusion(std::vector<ClockPath> clocks, double x0,
                                                  std::uint64_t seed) {
  if (clocks.empty()) return {};
  const TimeGrid grid = clocks.front().grid;
  std::vector<SubDiffusionPath> paths;
  paths.reserve(clocks.size());
  for (std::size_t p = 0; p < clocks.size(); ++p) {
    if (!(clocks[p].grid == grid)) {
      throw std::invalid_argument("clock " + std::to_string(p) + " is on a different time grid");
    }
    RandomStream rng(seed, StreamTag::brownian, p);
    const std::size_t n = grid.n_steps;
    SubDiffusionPath path{std::move(clocks[p]), x0, std::vector<double>(n + 1),
                          std::vector<double>(n)};
    path.X[0] = x0;
    for (std::size_t k = 0; k < n; ++k) {
      // One normal per step whether or not the clock moves, so a path's noise
      // does not depend on where its clock is frozen.
      const double g = rng.normal();
      const double v = path.clock.dL[k];
      path.dB[k] = v > 0.0 ? std::sqrt(v) * g : 0.0;
      path.X[k + 1] = path.X[k] + path.dB[k];
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

MarkovState markov_state(const SubDiffusionPath& path, std::size_t k) {
  if (k >= path.X.size()) throw std::out_of_range("grid index " + std::to_string(k) + " out of range");
  return {path.X[k], path.clock.R[k]};
}

PathEnsemble::PathEnsemble(const std::vector<SubDiffusionPath>& paths) {
  if (paths.empty()) throw std::invalid_argument("empty path ensemble");
  grid_ = paths.front().clock.grid;
  kappa_ = paths.front().clock.kappa;
  x0_ = paths.front().x0;
  const std::size_t n = grid_.n_steps;
  const std::size_t m = paths.size();
  L_ = Field(n + 1, m);
  R_ = Field(n + 1, m);
  X_ = Field(n + 1, m);
  dL_ = Field(n, m);
  dB_ = Field(n, m);
  for (std::size_t p = 0; p < m; ++p) {
    const auto& path = paths[p];
    if (!(path.clock.grid == grid_) || path.clock.kappa != kappa_ || path.x0 != x0_) {
      throw std::invalid_argument("path " + std::to_string(p) + " does not match the ensemble");
    }
    for (std::size_t k = 0; k <= n; ++k) {
      L_(k, p) = path.clock.L[k];
      R_(k, p) = path.clock.R[k];
      X_(k, p) = path.X[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
      dL_(k, p) = path.clock.dL[k];
      dB_(k, p) = path.dB[k];
    }
  }
}

std::shared_ptr<const PathEnsemble> make_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid,
                                                  std::size_t n_paths, double x0, std::uint64_t seed) {
  auto clocks = sample_clock_ensemble(spec, grid, n_paths, seed);
  return std::make_shared<const PathEnsemble>(sample_subdiffusion(std::move(clocks), x0, seed));
}

std::shared_ptr<const PathEnsemble> make_brownian_ensemble(double kappa, const TimeGrid& grid,
                                                           std::size_t n_paths, double x0,
                                                           std::uint64_t seed) {
  SubordinatorSpec{kappa, NoJumps{}}.validate();
  grid.validate();
  if (n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
  const std::size_t n = grid.n_steps;
  ClockPath clock{grid, kappa, std::vector<double>(n + 1), std::vector<double>(n + 1),
                  std::vector<double>(n)};
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = grid.time(k);
    clock.L[k] = t < grid.a ? 0.0 : (t - grid.a) / kappa;
    clock.R[k] = t < grid.a ? grid.a - t : 0.0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const bool active = grid.time(k) >= grid.a;
    clock.dL[k] = active ? clock.max_increment()
                         : std::clamp(clock.L[k + 1] - clock.L[k], 0.0, clock.max_increment());
  }
  std::vector<ClockPath> clocks(n_paths, clock);
  return std::make_shared<const PathEnsemble>(sample_subdiffusion(std::move(clocks), x0, seed));
}

}  // namespace subfbsde
