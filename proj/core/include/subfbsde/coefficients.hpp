#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subfbsde/subdiffusion.hpp"

namespace subfbsde {

/// Coefficient randomness enters only through the Markov state (X_t, R_t), which
/// makes every evaluator progressively measurable by construction.
using DriftFn = std::function<double(double t, const MarkovState& s, double x, double y)>;
using DiffusionFn = std::function<double(double t, const MarkovState& s, double x, double y, double z)>;
using TerminalFn = std::function<double(const MarkovState& s, double x)>;

/// decreasing: (m1)/(m2) with "<= -c(...)" and phi non-decreasing.
/// increasing: the mirrored ">= c(...)" conditions and phi non-increasing.
enum class Orientation { decreasing, increasing };

/// dx = b dt + delta dL + sigma dB,  -dy = g dt + h dL - z dB,  y_T = phi(x_T).
struct CoefficientBundle {
  std::string name;
  DriftFn b;
  DriftFn g;
  DiffusionFn delta;
  DiffusionFn sigma;
  DiffusionFn h;
  TerminalFn phi;
  double lipschitz = 1.0;     // declared L >= 1
  double monotonicity = 1.0;  // declared c > 0
  Orientation orientation = Orientation::decreasing;

  void validate() const;
};

struct BundleParams {
  double c = 1.0;
};

/// Catalog names: canonical_monotone, canonical_flipped_hp2, linear_test,
/// riccati_test, divergence_demo, remark32_margin, zero.
CoefficientBundle make_bundle(std::string_view name, const BundleParams& params = {});
std::vector<std::string> bundle_catalog();

/// b = -c y, g = c x, delta = -c y, sigma = -c z, h = c x, phi = x.
CoefficientBundle canonical_monotone(double c = 1.0);
/// The increasing-orientation mirror of canonical_monotone: b = c y, g = -c x, delta = c y,
/// sigma = c z, h = -c x, phi = -x.
CoefficientBundle canonical_flipped_hp2(double c = 1.0);
/// The alpha = 0 anchor itself: b = -y, g = x, delta = -y, sigma = -z, h = x, phi = x.
CoefficientBundle linear_test();
/// Affine bundle b = delta = -y/2, sigma = -z/2, g = h = 3x/2, phi = 2x whose
/// deterministic solution is y = P(t) x with P solving a Riccati equation.
CoefficientBundle riccati_test();
/// Anchor coefficients with phi = -5x: non-monotone terminal coupling on which
/// the one-shot Picard iteration diverges.
CoefficientBundle divergence_demo();
/// Drifts satisfying the one-sided conditions with constant c plus cross terms
/// of Lipschitz constant `cross` < c/2 (declared monotonicity c/2).
CoefficientBundle remark32_margin(double c = 1.0, double cross = 0.4);
/// All coefficients identically zero.
CoefficientBundle zero_bundle();

// ---------------------------------------------------------------------------
// Hypothesis checking
// ---------------------------------------------------------------------------

struct HypothesisSampler {
  double t_min = 0.0;
  double t_max = 1.0;
  double box = 3.0;    // x, y, z coordinates and the state's x drawn from [-box, box]
  double r_max = 2.0;  // overshoot drawn from [0, r_max]
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
};

struct HypothesisTuple {
  double t = 0.0;
  MarkovState state;
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0, z1 = 0.0, z2 = 0.0;
};

struct HypothesisVerdict {
  bool lipschitz = false;
  bool m1 = false;
  bool m2 = false;
  bool phi_monotone = false;
  bool all() const noexcept { return lipschitz && m1 && m2 && phi_monotone; }
};

/// A pass is evidence only; a failure carries the first violating tuple found.
struct HypothesisReport {
  double lipschitz_estimate = 0.0;
  /// max over samples of LHS + c(|dx|^2 + |dy|^2) for (m1), sign-flipped for
  /// the increasing orientation; <= 0 means the sampled condition holds.
  double m1_margin = 0.0;
  double m2_margin = 0.0;
  bool phi_monotone = true;
  std::size_t samples_used = 0;
  HypothesisVerdict verdict;
  std::optional<HypothesisTuple> m1_violation;
  std::optional<HypothesisTuple> m2_violation;
  std::optional<HypothesisTuple> phi_violation;
  std::optional<HypothesisTuple> lipschitz_violation;
};

inline constexpr double kHypothesisSlack = 1e-12;

/// Throws std::domain_error if an evaluator returns a non-finite value.
HypothesisReport check_hypothesis(const CoefficientBundle& bundle, const HypothesisSampler& sampler);

// ---------------------------------------------------------------------------
// Continuation family
// ---------------------------------------------------------------------------

struct ContinuationParams {
  double alpha = 0.0;
  double c_alpha = 1.0;
};

/// c_alpha = alpha c + (1 - alpha).
ContinuationParams continuation_params(double alpha, double c);

/// alpha * bundle + (1 - alpha) * anchor, where the anchor is linear_test()
/// (or its mirror for increasing bundles). alpha = 1 returns the bundle's
/// evaluators unchanged.
CoefficientBundle continuation_transform(const CoefficientBundle& bundle, double alpha);

/// The (x, y, z) -> (x, -y, -z) mirror; swaps the orientation.
CoefficientBundle mirror_orientation(const CoefficientBundle& bundle);

struct Eta0 {
  double value = 0.0;
  double forward_bound = 0.0;   // 1 / (3 (1 + L) ((1 + 1/kappa) T + 1))
  double monotone_bound = 0.0;  // c / (1 + 4 C1), c clamped to min(c, 1)
};

/// Continuation step size bound. Throws std::invalid_argument on non-positive inputs.
Eta0 eta0(double L, double c, double kappa, double T, double C1);

/// Default for the unspecified constant C1: 4 (1 + L)^2.
double default_c1(double L);

}  // namespace subfbsde
