#include "subfbsde/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace subfbsde {

namespace {

void check_finite(std::span<const double> v, const char* what, std::size_t k) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::domain_error(std::string("non-finite ") + what + " at slice " + std::to_string(k));
    }
  }
}

// Path-independence guard for the deterministic conditional expectation.
void require_path_independent(std::span<const double> v, std::size_t k) {
  if (v.empty()) return;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi - *lo > 1e-9 * (1.0 + std::abs(*lo) + std::abs(*hi))) {
    throw std::invalid_argument("deterministic conditional expectation requested but data vary across paths at slice " +
                                std::to_string(k));
  }
}

}  // namespace

std::vector<double> build_xi(const ForcingSet& forcings, const PathEnsemble& ensemble) {
  forcings.validate(ensemble);
  const std::size_t n = ensemble.n_steps();
  const std::size_t m = ensemble.n_paths();
  const double dt = ensemble.grid().dt();
  std::vector<double> xi(m, 0.0);
  for (std::size_t p = 0; p < m; ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double w = std::exp(-ensemble.grid().time(k) - ensemble.L()(k, p));
      acc += w * ((forcings.g0(k, p) + forcings.b0(k, p)) * dt +
                  (forcings.h0(k, p) + forcings.delta0(k, p)) * ensemble.dL()(k, p));
    }
    xi[p] = std::exp(-ensemble.grid().T - ensemble.L()(n, p)) * forcings.phi0[p] + acc;
  }
  return xi;
}

LinearResult solve_linear(const ForcingSet& forcings, double x0, std::shared_ptr<const PathEnsemble> ensemble,
                          const LinearOptions& options, const SolutionTriple* iterate) {
  if (!ensemble) throw std::invalid_argument("solve_linear needs an ensemble");
  if (!std::isfinite(x0)) throw std::invalid_argument("x0 must be finite");
  options.basis.validate();
  const PathEnsemble& ens = *ensemble;
  forcings.validate(ens);
  const std::size_t n = ens.n_steps();
  const std::size_t m = ens.n_paths();
  const double dt = ens.grid().dt();
  const double floor = options.dl_floor_factor * dt / ens.kappa();
  const bool use_iterate = iterate && options.basis.include_iterates;
  if (use_iterate && (iterate->n_paths() != m || iterate->n_steps() != n)) {
    throw std::invalid_argument("iterate shape does not match the ensemble");
  }

  LinearResult out;
  LinearWorkspace& ws = out.workspace;
  ws.xi = build_xi(forcings, ens);
  ws.ybar = ws.zbar = ws.ytilde = ws.ztilde = Field(n + 1, m);

  // Backward pass on the running target W_k = f_k + e^{-dt-dL_k} W_{k+1},
  // W_n = phi0, whose conditional expectation is ybar_k (and W_0 = xi).
  std::vector<double> W(forcings.phi0), discount(m), target(m);
  std::copy(W.begin(), W.end(), ws.ybar.slice(n).begin());

  for (std::size_t k = n; k-- > 0;) {
    const auto dL = ens.dL().slice(k);
    const auto dB = ens.dB().slice(k);
    for (std::size_t p = 0; p < m; ++p) {
      discount[p] = std::exp(-dt - dL[p]);
      W[p] = (forcings.g0(k, p) + forcings.b0(k, p)) * dt + (forcings.h0(k, p) + forcings.delta0(k, p)) * dL[p] +
             discount[p] * W[p];
    }
    check_finite(W, "backward target", k);

    auto ybar = ws.ybar.slice(k);
    auto zbar = ws.zbar.slice(k);
    const auto ynext = ws.ybar.slice(k + 1);
    if (options.condexp == CondExpMode::deterministic) {
      require_path_independent(W, k);
      std::copy(W.begin(), W.end(), ybar.begin());
      std::fill(zbar.begin(), zbar.end(), 0.0);
      continue;
    }

    FeatureColumns features = state_features(ens, k, options.basis);
    if (use_iterate) {
      features.push_back(iterate->x.slice(k));
      features.push_back(iterate->y.slice(k));
    }
    const SliceProjector projector(features, options.basis.degree, options.basis.ridge_for(m), k);
    projector.project(W, ybar);
    // The F_k-measurable ybar_k is subtracted as a control variate before
    // projecting against dB_k; it only removes noise.
    for (std::size_t p = 0; p < m; ++p) target[p] = discount[p] * ynext[p] - ybar[p];
    const auto z = extract_z(target, dB, dL, projector, floor);
    std::copy(z.begin(), z.end(), zbar.begin());
  }

  SolutionTriple& sol = out.solution;
  sol = SolutionTriple::zeros(ensemble, x0);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = ens.grid().time(k);
    for (std::size_t p = 0; p < m; ++p) {
      const double w = std::exp(-t - ens.L()(k, p));
      ws.ytilde(k, p) = w * ws.ybar(k, p);
      ws.ztilde(k, p) = w * ws.zbar(k, p);
    }
  }

  // Forward pass: exact exponential weights over each step, left-point integrands.
  auto x = sol.x.slice(0);
  std::fill(x.begin(), x.end(), x0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto dL = ens.dL().slice(k);
    const auto dB = ens.dB().slice(k);
    for (std::size_t p = 0; p < m; ++p) {
      const double xk = sol.x(k, p);
      const double yb = ws.ybar(k, p);
      const double zb = ws.zbar(k, p);
      const double s0 = forcings.sigma0(k, p);
      sol.x(k + 1, p) = std::exp(-dt - dL[p]) * (xk + (forcings.b0(k, p) - yb) * dt +
                                                 (forcings.delta0(k, p) - yb) * dL[p] + 0.5 * (s0 - zb) * dB[p]);
      sol.z(k, p) = 0.5 * (zb + s0);
    }
    check_finite(sol.x.slice(k + 1), "forward state", k + 1);
  }
  sol.y = sol.x + ws.ybar;
  return out;
}

RatioReport apriori_linear_check(const SolutionTriple& solution, const ForcingSet& forcings, double x0) {
  if (!solution.ensemble) throw std::invalid_argument("solution has no ensemble");
  const PathEnsemble& ens = *solution.ensemble;
  forcings.validate(ens);
  const std::size_t n = ens.n_steps();
  const std::size_t m = ens.n_paths();
  const double dt = ens.grid().dt();

  std::vector<double> lhs = sup_xy_squared(solution);
  std::vector<double> rhs(m);
  for (std::size_t p = 0; p < m; ++p) {
    double r = x0 * x0 + forcings.phi0[p] * forcings.phi0[p];
    for (std::size_t k = 0; k < n; ++k) {
      const double dL = ens.dL()(k, p);
      lhs[p] += solution.z(k, p) * solution.z(k, p) * dL;
      const double b = forcings.b0(k, p), g = forcings.g0(k, p);
      const double d = forcings.delta0(k, p), h = forcings.h0(k, p), s = forcings.sigma0(k, p);
      r += (b * b + g * g) * dt + (d * d + h * h + s * s) * dL;
    }
    rhs[p] = r;
  }
  return ratio_report(lhs, rhs);
}

}  // namespace subfbsde
