#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "subfbsde/clock.hpp"
#include "subfbsde/field.hpp"

namespace subfbsde {

/// X_t = x0 + B_{L_{(t-a)^+}} at grid nodes; dB[k] ~ N(0, dL[k]) given the clock.
struct SubDiffusionPath {
  ClockPath clock;
  double x0 = 0.0;
  std::vector<double> X;   // n_steps + 1
  std::vector<double> dB;  // n_steps, exactly 0 wherever dL[k] == 0
};

/// The augmented Markov pair (X_t, R_t).
struct MarkovState {
  double x = 0.0;
  double r = 0.0;
};

/// Brownian increments conditional on each clock; path p draws from substream
/// (seed, brownian, p). Throws std::invalid_argument if clocks disagree on the grid.
std::vector<SubDiffusionPath> sample_subdiffusion(std::vector<ClockPath> clocks, double x0,
                                                  std::uint64_t seed);

MarkovState markov_state(const SubDiffusionPath& path, std::size_t k);

/// Slice-major copy of an ensemble of sub-diffusion paths. This is the shared,
/// read-only input of the solvers.
class PathEnsemble {
 public:
  explicit PathEnsemble(const std::vector<SubDiffusionPath>& paths);

  const TimeGrid& grid() const noexcept { return grid_; }
  double kappa() const noexcept { return kappa_; }
  double x0() const noexcept { return x0_; }
  std::size_t n_paths() const noexcept { return X_.n_paths(); }
  std::size_t n_steps() const noexcept { return grid_.n_steps; }

  const Field& L() const noexcept { return L_; }
  const Field& R() const noexcept { return R_; }
  const Field& X() const noexcept { return X_; }
  const Field& dL() const noexcept { return dL_; }
  const Field& dB() const noexcept { return dB_; }

  MarkovState state(std::size_t k, std::size_t p) const noexcept { return {X_(k, p), R_(k, p)}; }

 private:
  TimeGrid grid_;
  double kappa_;
  double x0_;
  Field L_, R_, X_;  // n_steps + 1 slices
  Field dL_, dB_;    // n_steps slices
};

/// Clock sampling, Brownian sampling and flattening in one call.
std::shared_ptr<const PathEnsemble> make_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid,
                                                  std::size_t n_paths, double x0, std::uint64_t seed);

/// Classical Brownian ensemble (L_t = (t-a)^+/kappa built directly, no
/// subordinator) on the same Brownian substreams as make_ensemble.
std::shared_ptr<const PathEnsemble> make_brownian_ensemble(double kappa, const TimeGrid& grid,
                                                           std::size_t n_paths, double x0,
                                                           std::uint64_t seed);

}  // namespace subfbsde
