#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subfbsde/coefficients.hpp"
#include "subfbsde/diagnostics.hpp"
#include "subfbsde/linear_solver.hpp"
#include "subfbsde/solution.hpp"

namespace subfbsde {

/// flatten: one Picard level from the linear anchor with the whole gap
/// (eta = 1). nested: an alpha ladder with steps <= eta, each level's solver
/// being the Picard iteration of the level below.
enum class Strategy { flatten, nested };

struct ContinuationConfig {
  /// Nested ladder step; unset means eta0 when it fits in nested_max_depth
  /// levels, and 1 / nested_max_depth otherwise.
  std::optional<double> eta;
  double picard_tol = 1e-3;  // relative to the M-norm of the first iterate
  int max_picard = 25;
  Strategy strategy = Strategy::flatten;
  int nested_max_depth = 3;
  std::optional<double> C1;  // unset: default_c1(L)
  bool warm_start = true;
  bool check_hypothesis = true;
  LinearOptions linear;

  void validate() const;
};

/// Residual history of one Picard level (the last invocation at that depth).
struct LevelRecord {
  double alpha0 = 0.0;
  double eta = 0.0;
  std::vector<double> residuals;
  std::optional<double> fitted_ratio;  // only with >= 3 positive residuals
  bool converged = false;
  std::size_t invocations = 0;
};

struct SolveDiagnostics {
  std::vector<LevelRecord> levels;  // innermost (alpha0 = 0) first
  Eta0 eta0;
  double ladder_step = 1.0;
  std::optional<RatioReport> apriori;
  std::optional<HypothesisReport> hypothesis;
  std::vector<std::string> warnings;
  bool diverged = false;
  std::string divergence_message;
  std::size_t linear_solves = 0;
};

struct FbsdeResult {
  SolutionTriple solution;
  SolveDiagnostics diagnostics;
};

class DivergedError : public std::runtime_error {
 public:
  DivergedError(double alpha0, double eta, std::vector<double> residuals, const std::string& what)
      : std::runtime_error(what), alpha0_(alpha0), eta_(eta), residuals_(std::move(residuals)) {}
  double alpha0() const noexcept { return alpha0_; }
  double eta() const noexcept { return eta_; }
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  double alpha0_, eta_;
  std::vector<double> residuals_;
};

/// b0^n = eta (y + b) + b0,   delta0^n = eta (y + delta) + delta0,  sigma0^n = eta (z + sigma) + sigma0,
/// g0^n = eta (g - x) + g0,   h0^n = eta (h - x) + h0,              phi0^n = eta (phi(x_T) - x_T) + phi0,
/// with the coefficients evaluated along theta_prev: the gap between the
/// decreasing-oriented bundle and the linear anchor, scaled by eta.
ForcingSet picard_forcings(const CoefficientBundle& bundle, const SolutionTriple& theta_prev, double eta,
                           const ForcingSet& base);

/// Solves FBSDE(alpha0) with the given forcings; `hint` is the current outer
/// iterate (regression features and warm start).
using LevelSolver = std::function<SolutionTriple(const ForcingSet& forcings, const SolutionTriple* hint)>;

struct LevelResult {
  SolutionTriple solution;
  std::vector<double> residuals;
  bool converged = false;
  bool diverged = false;
  std::string message;
  std::size_t solves = 0;
};

/// Picard iteration Theta^{n+1} = level_solver(picard_forcings(Theta^n)) from
/// `initial` (zero when null) until the residual drops below picard_tol times
/// the first residual. Divergence (3 consecutive increases, growth beyond 1e6
/// times the first residual, or a non-finite residual) ends the iteration with
/// `diverged` set; exhausting max_picard leaves `converged` false.
LevelResult solve_level(const LevelSolver& level_solver, const CoefficientBundle& bundle, double eta,
                        const ForcingSet& base, double x0, std::shared_ptr<const PathEnsemble> ensemble,
                        const ContinuationConfig& config, const SolutionTriple* initial = nullptr,
                        double alpha0 = 0.0);

/// End-to-end solve of dx = b dt + delta dL + sigma dB, -dy = g dt + h dL - z dB,
/// y_T = phi(x_T). Increasing-oriented bundles are mirrored, solved and mapped
/// back. Divergence is reported in the diagnostics rather than thrown;
/// `initial` seeds the outermost Picard iteration.
FbsdeResult solve_fbsde(const CoefficientBundle& bundle, double x0, std::shared_ptr<const PathEnsemble> ensemble,
                        const ContinuationConfig& config = {}, const SolutionTriple* initial = nullptr);

}  // namespace subfbsde
