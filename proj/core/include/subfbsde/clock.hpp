#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "subfbsde/random.hpp"

namespace subfbsde {

// ---------------------------------------------------------------------------
// Subordinator description
// ---------------------------------------------------------------------------

struct ExponentialJumps {
  double mean = 1.0;
};
struct ParetoJumps {
  double scale = 1.0;
  double shape = 1.0;
};
struct FixedJumps {
  double size = 1.0;
};
using JumpLaw = std::variant<ExponentialJumps, ParetoJumps, FixedJumps>;

struct NoJumps {};

/// Finite-activity jump part: jumps arrive at `rate` per unit intrinsic time.
struct CompoundPoissonJumps {
  double rate = 0.0;
  JumpLaw law = FixedJumps{};
};

/// Stable-like Levy measure nu(dr) = index/Gamma(1-index) r^(-1-index) dr with
/// every jump below `cutoff` dropped. The remainder is compound Poisson with
/// rate cutoff^(-index)/Gamma(1-index) and Pareto(cutoff, index) sizes.
struct TruncatedStableJumps {
  double index = 0.5;
  double cutoff = 1e-3;
};

using JumpActivity = std::variant<NoJumps, CompoundPoissonJumps, TruncatedStableJumps>;

/// S_r = kappa r + (pure-jump subordinator). kappa > 0 throughout.
struct SubordinatorSpec {
  double kappa = 1.0;
  JumpActivity jumps = NoJumps{};

  /// Throws std::invalid_argument on kappa <= 0, negative rates or
  /// non-positive jump parameters.
  void validate() const;

  /// The finite-activity law actually simulated (rate 0 for NoJumps).
  CompoundPoissonJumps finite_activity() const;

  /// E[S_1]; infinite for heavy-tailed Pareto laws.
  double mean_increment() const;
};

/// A finite realisation of S on [0, horizon].
struct SubordinatorSkeleton {
  SubordinatorSpec spec;
  double horizon = 0.0;
  std::vector<double> jump_times;  // strictly increasing, in (0, horizon]
  std::vector<double> jump_sizes;

  /// S_r (right-continuous). Requires 0 <= r <= horizon.
  double value(double r) const;
};

/// Uniform on (0, 1); lets tests inject prescribed draws.
using UniformSource = std::function<double()>;

/// Jump arrivals by exponential gaps, sizes by inverse-CDF. Jump count on
/// [0, horizon] is Poisson(rate * horizon).
SubordinatorSkeleton sample_subordinator(const SubordinatorSpec& spec, double horizon,
                                         const UniformSource& uniform);
SubordinatorSkeleton sample_subordinator(const SubordinatorSpec& spec, double horizon,
                                         RandomStream& rng);

// ---------------------------------------------------------------------------
// Grid and inverse clock
// ---------------------------------------------------------------------------

/// Uniform grid t_k = k T / n_steps on [0, T] with activation delay a.
struct TimeGrid {
  double a = 0.0;
  double T = 1.0;
  std::size_t n_steps = 100;

  void validate() const;
  double dt() const noexcept { return T / static_cast<double>(n_steps); }
  double time(std::size_t k) const noexcept {
    return T * static_cast<double>(k) / static_cast<double>(n_steps);
  }
  std::size_t n_nodes() const noexcept { return n_steps + 1; }
  bool operator==(const TimeGrid&) const = default;
};

/// Delayed inverse subordinator L_{(t-a)^+} and overshoot R_t on a grid.
struct ClockPath {
  TimeGrid grid;
  double kappa = 1.0;
  std::vector<double> L;   // n_steps + 1
  std::vector<double> R;   // n_steps + 1, R[0] = a
  std::vector<double> dL;  // n_steps, 0 <= dL[k] <= dt/kappa

  /// The exact per-step bound dt/kappa used by the clamp in invert_clock.
  double max_increment() const noexcept { return grid.dt() / kappa; }
};

class InsufficientHorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact piecewise inversion L_t = inf{r > 0 : S_r > t}: slope 1/kappa between
/// jumps, flat at r_i across a jump of S from s- to s+. The overshoot follows
/// R_t = a + S_{L_{(t-a)^+}} - t. Throws InsufficientHorizonError when the
/// skeleton does not reach T - a.
ClockPath invert_clock(const SubordinatorSkeleton& skeleton, const TimeGrid& grid);

/// Independent clocks; path p uses substream (seed, clock, p), so any subset
/// of paths can be regenerated on its own.
std::vector<ClockPath> sample_clock_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid,
                                             std::size_t n_paths, std::uint64_t seed);

/// Path p of the ensemble above.
ClockPath sample_clock_path(const SubordinatorSpec& spec, const TimeGrid& grid, std::uint64_t seed,
                            std::size_t path_index);

}  // namespace subfbsde
