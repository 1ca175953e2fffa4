#include "subfbsde/clock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace subfbsde {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate_law(const JumpLaw& law) {
  std::visit(overloaded{
                 [](const ExponentialJumps& j) {
                   require(positive_finite(j.mean), "exponential jump mean must be > 0");
                 },
                 [](const ParetoJumps& j) {
                   require(positive_finite(j.scale), "pareto jump scale must be > 0");
                   require(positive_finite(j.shape), "pareto jump shape must be > 0");
                 },
                 [](const FixedJumps& j) {
                   require(positive_finite(j.size), "fixed jump size must be > 0");
                 },
             },
             law);
}

double draw_size(const JumpLaw& law, double u) {
  return std::visit(overloaded{
                        [u](const ExponentialJumps& j) { return -j.mean * std::log(u); },
                        [u](const ParetoJumps& j) { return j.scale * std::pow(u, -1.0 / j.shape); },
                        [](const FixedJumps& j) { return j.size; },
                    },
                    law);
}

}  // namespace

void SubordinatorSpec::validate() const {
  require(positive_finite(kappa), "kappa must be > 0");
  std::visit(overloaded{
                 [](const NoJumps&) {},
                 [](const CompoundPoissonJumps& j) {
                   require(std::isfinite(j.rate) && j.rate >= 0.0, "jump rate must be >= 0");
                   validate_law(j.law);
                 },
                 [](const TruncatedStableJumps& j) {
                   require(std::isfinite(j.index) && j.index > 0.0 && j.index < 1.0,
                           "stable index must lie in (0, 1)");
                   require(positive_finite(j.cutoff), "stable cutoff must be > 0");
                 },
             },
             jumps);
}

CompoundPoissonJumps SubordinatorSpec::finite_activity() const {
  return std::visit(overloaded{
                        [](const NoJumps&) { return CompoundPoissonJumps{0.0, FixedJumps{1.0}}; },
                        [](const CompoundPoissonJumps& j) { return j; },
                        [](const TruncatedStableJumps& j) {
                          const double rate = std::pow(j.cutoff, -j.index) / std::tgamma(1.0 - j.index);
                          return CompoundPoissonJumps{rate, ParetoJumps{j.cutoff, j.index}};
                        },
                    },
                    jumps);
}

double SubordinatorSpec::mean_increment() const {
  const auto cp = finite_activity();
  const double mean_size =
      std::visit(overloaded{
                     [](const ExponentialJumps& j) { return j.mean; },
                     [](const ParetoJumps& j) {
                       return j.shape > 1.0 ? j.scale * j.shape / (j.shape - 1.0)
                                            : std::numeric_limits<double>::infinity();
                     },
                     [](const FixedJumps& j) { return j.size; },
                 },
                 cp.law);
  return cp.rate == 0.0 ? kappa : kappa + cp.rate * mean_size;
}

double SubordinatorSkeleton::value(double r) const {
  if (r < 0.0 || r > horizon) throw std::out_of_range("subordinator evaluated outside [0, horizon]");
  double s = spec.kappa * r;
  for (std::size_t i = 0; i < jump_times.size() && jump_times[i] <= r; ++i) s += jump_sizes[i];
  return s;
}

SubordinatorSkeleton sample_subordinator(const SubordinatorSpec& spec, double horizon,
                                         const UniformSource& uniform) {
  spec.validate();
  require(std::isfinite(horizon) && horizon >= 0.0, "horizon must be finite and >= 0");

  SubordinatorSkeleton sk{spec, horizon, {}, {}};
  const auto cp = spec.finite_activity();
  if (cp.rate == 0.0) return sk;

  double r = 0.0;
  for (;;) {
    r += -std::log(uniform()) / cp.rate;
    if (!(r <= horizon)) break;
    sk.jump_times.push_back(r);
    sk.jump_sizes.push_back(draw_size(cp.law, uniform()));
  }
  return sk;
}

SubordinatorSkeleton sample_subordinator(const SubordinatorSpec& spec, double horizon,
                                         RandomStream& rng) {
  return sample_subordinator(spec, horizon, [&rng] { return rng.uniform(); });
}

void TimeGrid::validate() const {
  require(std::isfinite(a) && a >= 0.0, "activation delay a must be >= 0");
  require(std::isfinite(T) && T > a, "horizon T must satisfy T > a");
  require(n_steps >= 1, "n_steps must be >= 1");
}

ClockPath invert_clock(const SubordinatorSkeleton& skeleton, const TimeGrid& grid) {
  grid.validate();
  skeleton.spec.validate();

  const double kappa = skeleton.spec.kappa;
  const std::size_t n = grid.n_steps;
  ClockPath path{grid, kappa, std::vector<double>(n + 1), std::vector<double>(n + 1),
                 std::vector<double>(n)};

  // Segment id per node: even = linear piece before jump i/2, odd = flat at jump i/2,
  // -1 = before activation. Two nodes on the same linear piece give dL = dt/kappa.
  std::vector<long> segment(n + 1);

  const auto& times = skeleton.jump_times;
  const auto& sizes = skeleton.jump_sizes;
  std::size_t next = 0;     // first jump not yet passed
  double cumulative = 0.0;  // total size of passed jumps

  for (std::size_t k = 0; k <= n; ++k) {
    const double t = grid.time(k);
    if (t < grid.a) {
      path.L[k] = 0.0;
      path.R[k] = grid.a - t;
      segment[k] = -1;
      continue;
    }
    const double u = t - grid.a;
    for (;;) {
      if (next < times.size()) {
        const double s_minus = kappa * times[next] + cumulative;
        if (u < s_minus) {
          path.L[k] = (u - cumulative) / kappa;
          path.R[k] = 0.0;
          segment[k] = 2 * static_cast<long>(next);
          break;
        }
        const double s_plus = s_minus + sizes[next];
        if (u < s_plus) {
          path.L[k] = times[next];
          path.R[k] = s_plus - u;
          segment[k] = 2 * static_cast<long>(next) + 1;
          break;
        }
        cumulative += sizes[next];
        ++next;
        continue;
      }
      const double l = (u - cumulative) / kappa;
      if (l > skeleton.horizon) {
        std::ostringstream msg;
        msg << "subordinator skeleton horizon " << skeleton.horizon
            << " too short to invert the clock at t = " << t;
        throw InsufficientHorizonError(msg.str());
      }
      path.L[k] = l;
      path.R[k] = 0.0;
      segment[k] = 2 * static_cast<long>(next);
      break;
    }
  }

  const double bound = path.max_increment();
  for (std::size_t k = 0; k < n; ++k) {
    const bool linear = segment[k] >= 0 && segment[k] == segment[k + 1] && segment[k] % 2 == 0;
    path.dL[k] = linear ? bound : std::clamp(path.L[k + 1] - path.L[k], 0.0, bound);
  }
  return path;
}

ClockPath sample_clock_path(const SubordinatorSpec& spec, const TimeGrid& grid, std::uint64_t seed,
                            std::size_t path_index) {
  RandomStream rng(seed, StreamTag::clock, path_index);
  // Drift alone carries S past T - a by intrinsic time (T - a)/kappa.
  const double horizon = (grid.T - grid.a) / spec.kappa;
  return invert_clock(sample_subordinator(spec, horizon, rng), grid);
}

std::vector<ClockPath> sample_clock_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid,
                                             std::size_t n_paths, std::uint64_t seed) {
  spec.validate();
  grid.validate();
  require(n_paths >= 1, "n_paths must be >= 1");
  std::vector<ClockPath> clocks;
  clocks.reserve(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) clocks.push_back(sample_clock_path(spec, grid, seed, p));
  return clocks;
}

}  // namespace subfbsde
