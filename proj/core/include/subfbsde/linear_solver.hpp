#pragma once

#include <memory>
#include <vector>

#include "subfbsde/diagnostics.hpp"
#include "subfbsde/field.hpp"
#include "subfbsde/regression.hpp"
#include "subfbsde/solution.hpp"

namespace subfbsde {

/// regression: least-squares conditional expectations on the ensemble.
/// deterministic: E[W | F_k] := W pathwise and z := 0; only valid when every
/// datum is path-independent (checked), e.g. drift-only clocks with
/// state-free coefficients. It removes regression noise entirely.
enum class CondExpMode { regression, deterministic };

struct LinearOptions {
  BasisSpec basis;
  CondExpMode condexp = CondExpMode::regression;
  double dl_floor_factor = 1e-12;  // floor = factor * dt / kappa
};

/// Intermediate objects of the reduction ybar = y - x.
struct LinearWorkspace {
  std::vector<double> xi;
  Field ybar, zbar;      // n + 1 slices, zbar[n] = 0
  Field ytilde, ztilde;  // e^{-t-L} ybar, e^{-t-L} zbar
};

struct LinearResult {
  SolutionTriple solution;
  LinearWorkspace workspace;
};

/// xi = e^{-T-L_T} phi0 + sum_k e^{-t_k-L_k} ((g0 + b0)_k dt + (h0 + delta0)_k dL_k).
std::vector<double> build_xi(const ForcingSet& forcings, const PathEnsemble& ensemble);

/// Solves
///   dx = (-y + b0) dt + (-y + delta0) dL + (-z + sigma0) dB,      x(0) = x0,
///  -dy = (x + g0) dt + (x + h0) dL - z dB,                        y(T) = x(T) + phi0.
/// `iterate`, when given and basis.include_iterates is set, contributes its
/// (x, y) slices as extra regression features.
LinearResult solve_linear(const ForcingSet& forcings, double x0,
                          std::shared_ptr<const PathEnsemble> ensemble, const LinearOptions& options = {},
                          const SolutionTriple* iterate = nullptr);

/// Ratio of E[sup(x^2 + y^2) + int z^2 dL] to
/// E[x0^2 + phi0^2 + int (b0^2 + g0^2) dt + int (delta0^2 + h0^2 + sigma0^2) dL].
RatioReport apriori_linear_check(const SolutionTriple& solution, const ForcingSet& forcings, double x0);

}  // namespace subfbsde
