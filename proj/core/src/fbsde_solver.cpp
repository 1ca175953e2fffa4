#include "subfbsde/fbsde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace subfbsde {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

SolutionTriple mirrored(SolutionTriple s) {
  s.y *= -1.0;
  s.z *= -1.0;
  return s;
}

}  // namespace

void ContinuationConfig::validate() const {
  if (eta && !(*eta > 0.0 && *eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be > 0");
  if (max_picard < 1) throw std::invalid_argument("max_picard must be >= 1");
  if (nested_max_depth < 1) throw std::invalid_argument("nested_max_depth must be >= 1");
  if (C1 && !(*C1 > 0.0)) throw std::invalid_argument("C1 must be > 0");
  linear.basis.validate();
}

ForcingSet picard_forcings(const CoefficientBundle& bundle, const SolutionTriple& theta_prev, double eta,
                           const ForcingSet& base) {
  if (!theta_prev.ensemble) throw std::invalid_argument("picard_forcings: iterate has no ensemble");
  const PathEnsemble& ens = *theta_prev.ensemble;
  base.validate(ens);
  ForcingSet f = base;
  if (eta == 0.0) return f;
  const std::size_t n = ens.n_steps();
  const std::size_t m = ens.n_paths();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = ens.grid().time(k);
    for (std::size_t p = 0; p < m; ++p) {
      const MarkovState s = ens.state(k, p);
      const double x = theta_prev.x(k, p), y = theta_prev.y(k, p), z = theta_prev.z(k, p);
      f.b0(k, p) += eta * (y + bundle.b(t, s, x, y));
      f.delta0(k, p) += eta * (y + bundle.delta(t, s, x, y, z));
      f.sigma0(k, p) += eta * (z + bundle.sigma(t, s, x, y, z));
      f.g0(k, p) += eta * (bundle.g(t, s, x, y) - x);
      f.h0(k, p) += eta * (bundle.h(t, s, x, y, z) - x);
    }
  }
  for (std::size_t p = 0; p < m; ++p) {
    const double xT = theta_prev.x(n, p);
    f.phi0[p] += eta * (bundle.phi(ens.state(n, p), xT) - xT);
  }
  f.validate(ens);
  return f;
}

LevelResult solve_level(const LevelSolver& level_solver, const CoefficientBundle& bundle, double eta,
                        const ForcingSet& base, double x0, std::shared_ptr<const PathEnsemble> ensemble,
                        const ContinuationConfig& config, const SolutionTriple* initial, double alpha0) {
  if (!ensemble) throw std::invalid_argument("solve_level needs an ensemble");
  if (bundle.orientation != Orientation::decreasing) {
    throw std::invalid_argument("solve_level expects a decreasing-oriented bundle; mirror it first");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("level step must lie in [0, 1]");

  LevelResult out;
  SolutionTriple theta = initial ? *initial : SolutionTriple::zeros(ensemble, x0);

  if (eta == 0.0) {
    // Forcings do not depend on the iterate: one solve is the fixed point.
    out.solution = level_solver(base, &theta);
    out.solves = 1;
    out.residuals.push_back(m_norm_distance(out.solution, theta));
    out.converged = true;
    return out;
  }

  double scale = 0.0;
  int rising = 0;
  for (int n = 0; n < config.max_picard; ++n) {
    const ForcingSet f = picard_forcings(bundle, theta, eta, base);
    SolutionTriple next = level_solver(f, &theta);
    ++out.solves;
    const double r = m_norm_distance(next, theta);
    theta = std::move(next);
    out.residuals.push_back(r);
    if (n == 0) scale = m_norm(theta).value;

    const double first = out.residuals.front();
    std::string why;
    if (!std::isfinite(r)) {
      why = "non-finite residual";
    } else if (n > 0 && r > 1e6 * first) {
      why = "residual exceeds 1e6 times the first residual";
    } else if (n > 0 && r > out.residuals[static_cast<std::size_t>(n) - 1]) {
      if (++rising >= 3) why = "residual increased 3 consecutive times";
    } else {
      rising = 0;
    }
    if (!why.empty()) {
      out.diverged = true;
      out.message = "DIVERGED at level alpha0=" + fmt(alpha0) + ", eta=" + fmt(eta) + " after " +
                    std::to_string(n + 1) + " iterations: " + why;
      break;
    }
    if (r <= config.picard_tol * scale) {
      out.converged = true;
      break;
    }
  }
  out.solution = std::move(theta);
  return out;
}

namespace {

void record(LevelRecord& rec, const LevelResult& r, double alpha0, double eta) {
  rec.alpha0 = alpha0;
  rec.eta = eta;
  rec.residuals = r.residuals;
  rec.converged = r.converged;
  ++rec.invocations;
  rec.fitted_ratio.reset();
  std::vector<double> positive;
  for (double v : r.residuals) {
    if (!(v > 0.0) || !std::isfinite(v)) break;
    positive.push_back(v);
  }
  if (positive.size() >= 3) rec.fitted_ratio = contraction_fit(positive);
}

}  // namespace

FbsdeResult solve_fbsde(const CoefficientBundle& bundle, double x0, std::shared_ptr<const PathEnsemble> ensemble,
                        const ContinuationConfig& config, const SolutionTriple* initial) {
  if (!ensemble) throw std::invalid_argument("solve_fbsde needs an ensemble");
  if (!std::isfinite(x0)) throw std::invalid_argument("x0 must be finite");
  config.validate();
  bundle.validate();

  if (bundle.orientation == Orientation::increasing) {
    std::optional<SolutionTriple> seed;
    if (initial) seed = mirrored(*initial);
    FbsdeResult res = solve_fbsde(mirror_orientation(bundle), x0, ensemble, config, seed ? &*seed : nullptr);
    res.solution = mirrored(std::move(res.solution));
    if (res.diagnostics.apriori) res.diagnostics.apriori = apriori_ratio(res.solution, bundle, x0);
    return res;
  }

  FbsdeResult out;
  SolveDiagnostics& diag = out.diagnostics;
  const PathEnsemble& ens = *ensemble;
  const double T = ens.grid().T;
  diag.eta0 = eta0(bundle.lipschitz, bundle.monotonicity, ens.kappa(), T,
                   config.C1.value_or(default_c1(bundle.lipschitz)));

  if (config.check_hypothesis) {
    HypothesisSampler sampler;
    sampler.t_min = 0.0;
    sampler.t_max = T;
    sampler.samples = 2000;
    diag.hypothesis = check_hypothesis(bundle, sampler);
    const HypothesisVerdict& v = diag.hypothesis->verdict;
    if (!v.lipschitz) diag.warnings.push_back("sampled Lipschitz estimate exceeds the declared constant");
    if (!v.m1) diag.warnings.push_back("monotonicity condition (m1) violated on a sampled tuple");
    if (!v.m2) diag.warnings.push_back("monotonicity condition (m2) violated on a sampled tuple");
    if (!v.phi_monotone) diag.warnings.push_back("terminal map is not monotone in the declared orientation");
  }

  // Ladder alpha_0 = 0 < ... < alpha_K = 1.
  std::vector<double> alphas{0.0};
  if (config.strategy == Strategy::flatten) {
    diag.ladder_step = 1.0;
  } else {
    double step = 0.0;
    const auto levels_for = [](double s) { return static_cast<int>(std::ceil(1.0 / s - 1e-12)); };
    if (config.eta) {
      step = *config.eta;
      if (levels_for(step) > config.nested_max_depth) {
        throw std::invalid_argument("nested ladder with eta=" + fmt(step) + " needs " +
                                    std::to_string(levels_for(step)) + " levels, above nested_max_depth=" +
                                    std::to_string(config.nested_max_depth));
      }
    } else if (levels_for(diag.eta0.value) <= config.nested_max_depth) {
      step = diag.eta0.value;
    } else {
      step = 1.0 / config.nested_max_depth;
      diag.warnings.push_back("ladder step " + fmt(step) + " exceeds eta0=" + fmt(diag.eta0.value) +
                              " (bounded by nested_max_depth)");
    }
    diag.ladder_step = step;
  }
  for (int j = 1;; ++j) {
    const double a = std::min(1.0, j * diag.ladder_step);
    alphas.push_back(a);
    if (a >= 1.0) break;
  }
  const std::size_t K = alphas.size() - 1;
  diag.levels.assign(K, LevelRecord{});

  // solvers[j] solves FBSDE(alpha_j) with arbitrary forcings.
  std::vector<LevelSolver> solvers(K);
  solvers[0] = [&](const ForcingSet& f, const SolutionTriple* hint) {
    ++diag.linear_solves;
    return solve_linear(f, x0, ensemble, config.linear, hint).solution;
  };
  for (std::size_t j = 1; j < K; ++j) {
    solvers[j] = [&, j](const ForcingSet& f, const SolutionTriple* hint) {
      const double eta = alphas[j] - alphas[j - 1];
      LevelResult r = solve_level(solvers[j - 1], bundle, eta, f, x0, ensemble, config,
                                  config.warm_start ? hint : nullptr, alphas[j - 1]);
      record(diag.levels[j - 1], r, alphas[j - 1], eta);
      if (r.diverged) throw DivergedError(alphas[j - 1], eta, r.residuals, r.message);
      return std::move(r.solution);
    };
  }

  const double eta_top = alphas[K] - alphas[K - 1];
  try {
    LevelResult top = solve_level(solvers[K - 1], bundle, eta_top, ForcingSet::zeros(ens.n_steps(), ens.n_paths()),
                                  x0, ensemble, config, initial, alphas[K - 1]);
    record(diag.levels[K - 1], top, alphas[K - 1], eta_top);
    out.solution = std::move(top.solution);
    if (top.diverged) {
      diag.diverged = true;
      diag.divergence_message = top.message;
    } else if (!top.converged) {
      diag.warnings.push_back("Picard iteration stopped at max_picard=" + std::to_string(config.max_picard) +
                              " without reaching picard_tol");
    }
  } catch (const DivergedError& e) {
    diag.diverged = true;
    diag.divergence_message = std::string(e.what()) + " (ladder level " + fmt(e.alpha0()) + ")";
    out.solution = SolutionTriple::zeros(ensemble, x0);
  }
  if (!diag.diverged) diag.apriori = apriori_ratio(out.solution, bundle, x0);
  return out;
}

}  // namespace subfbsde
