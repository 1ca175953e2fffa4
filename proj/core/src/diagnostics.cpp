#include "subfbsde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "subfbsde/random.hpp"

namespace subfbsde {

namespace {

const PathEnsemble& ensemble_of(const SolutionTriple& theta) {
  if (!theta.ensemble) throw std::invalid_argument("solution has no ensemble");
  return *theta.ensemble;
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

MNormValue m_norm(const SolutionTriple& theta) {
  const PathEnsemble& ens = ensemble_of(theta);
  const std::size_t n = ens.n_steps();
  const std::size_t m = theta.n_paths();
  const double dt = ens.grid().dt();
  MNormValue out;
  if (m == 0) return out;
  double x0s = 0.0, dts = 0.0, dls = 0.0;
  for (std::size_t p = 0; p < m; ++p) x0s += theta.x(0, p) * theta.x(0, p);
  for (std::size_t k = 0; k < n; ++k) {
    const auto x = theta.x.slice(k);
    const auto y = theta.y.slice(k);
    const auto z = theta.z.slice(k);
    const auto dL = ens.dL().slice(k);
    for (std::size_t p = 0; p < m; ++p) {
      dts += (x[p] * x[p] + y[p] * y[p]) * dt;
      dls += z[p] * z[p] * dL[p];
    }
  }
  const double inv = 1.0 / static_cast<double>(m);
  out.x0_part = x0s * inv;
  out.dt_part = dts * inv;
  out.dL_part = dls * inv;
  out.value = std::sqrt(out.x0_part + out.dt_part + out.dL_part);
  return out;
}

double m_norm_distance(const SolutionTriple& a, const SolutionTriple& b) { return m_norm(a - b).value; }

double variant_m_norm(const SolutionTriple& theta) {
  const PathEnsemble& ens = ensemble_of(theta);
  const std::size_t m = theta.n_paths();
  if (m == 0) return 0.0;
  const double dt = ens.grid().dt();
  double acc = 0.0;
  for (std::size_t p = 0; p < m; ++p) acc += theta.x(0, p) * theta.x(0, p);
  for (std::size_t k = 0; k < ens.n_steps(); ++k) {
    for (std::size_t p = 0; p < m; ++p) {
      const double dL = ens.dL()(k, p);
      const double x = theta.x(k, p), y = theta.y(k, p), z = theta.z(k, p);
      acc += (x * x + y * y) * (dt + dL) + z * z * dL;
    }
  }
  return std::sqrt(acc / static_cast<double>(m));
}

std::vector<double> sup_xy_squared(const SolutionTriple& theta) {
  std::vector<double> out(theta.n_paths(), 0.0);
  for (std::size_t k = 0; k < theta.x.n_slices(); ++k) {
    for (std::size_t p = 0; p < out.size(); ++p) {
      out[p] = std::max(out[p], theta.x(k, p) * theta.x(k, p) + theta.y(k, p) * theta.y(k, p));
    }
  }
  return out;
}

std::vector<double> successive_ratios(std::span<const double> residuals) {
  std::vector<double> out;
  for (std::size_t i = 1; i < residuals.size(); ++i) out.push_back(residuals[i] / residuals[i - 1]);
  return out;
}

double contraction_fit(std::span<const double> residuals) {
  if (residuals.size() < 3) throw std::invalid_argument("contraction_fit needs at least 3 residuals");
  for (double r : residuals) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("contraction_fit needs positive finite residuals");
    }
  }
  // Product of the tail ratios telescopes to r_last / r_1.
  const double steps = static_cast<double>(residuals.size() - 2);
  return std::exp((std::log(residuals.back()) - std::log(residuals[1])) / steps);
}

RatioReport ratio_report(std::span<const double> lhs, std::span<const double> rhs, std::uint64_t seed) {
  if (lhs.size() != rhs.size()) throw std::invalid_argument("ratio_report: sample sizes differ");
  RatioReport rep;
  const std::size_t m = lhs.size();
  if (m == 0) {
    rep.degenerate = true;
    return rep;
  }
  rep.lhs = mean(lhs);
  rep.rhs = mean(rhs);

  constexpr double kZero = 1e-12;
  if (!(rep.rhs > 0.0)) {
    if (rep.lhs > kZero) {
      rep.violation = true;
      rep.ratio = std::numeric_limits<double>::infinity();
    } else {
      rep.degenerate = true;
      rep.ratio = 0.0;
    }
    return rep;
  }
  rep.ratio = rep.lhs / rep.rhs;

  RandomStream rng(seed, StreamTag::bootstrap, 0);
  std::vector<double> ratios(kBootstrapResamples), lhs_means(kBootstrapResamples);
  for (std::size_t b = 0; b < kBootstrapResamples; ++b) {
    double sl = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_u64() % m);
      sl += lhs[j];
      sr += rhs[j];
    }
    lhs_means[b] = sl / static_cast<double>(m);
    ratios[b] = sr > 0.0 ? sl / sr : 0.0;
  }
  auto sd = [](const std::vector<double>& v) {
    const double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  rep.ratio_se = sd(ratios);
  rep.lhs_se = sd(lhs_means);
  return rep;
}

RatioReport apriori_ratio(const SolutionTriple& theta, const CoefficientBundle& bundle, double x0) {
  const PathEnsemble& ens = ensemble_of(theta);
  const std::size_t n = ens.n_steps();
  const std::size_t m = theta.n_paths();
  const double dt = ens.grid().dt();

  std::vector<double> lhs = sup_xy_squared(theta);
  std::vector<double> rhs(m, x0 * x0);
  for (std::size_t p = 0; p < m; ++p) {
    const double phi0 = bundle.phi(ens.state(n, p), 0.0);
    rhs[p] += phi0 * phi0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double t = ens.grid().time(k);
    for (std::size_t p = 0; p < m; ++p) {
      const MarkovState s = ens.state(k, p);
      const double dL = ens.dL()(k, p);
      lhs[p] += theta.z(k, p) * theta.z(k, p) * dL;
      const double b = bundle.b(t, s, 0.0, 0.0), g = bundle.g(t, s, 0.0, 0.0);
      const double d = bundle.delta(t, s, 0.0, 0.0, 0.0), h = bundle.h(t, s, 0.0, 0.0, 0.0),
                   sg = bundle.sigma(t, s, 0.0, 0.0, 0.0);
      rhs[p] += (b * b + g * g) * dt + (d * d + h * h + sg * sg) * dL;
    }
  }
  return ratio_report(lhs, rhs);
}

}  // namespace subfbsde
