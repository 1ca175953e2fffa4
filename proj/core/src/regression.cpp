#include "subfbsde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace subfbsde {

void BasisSpec::validate() const {
  if (degree < 0) throw std::invalid_argument("basis degree must be >= 0");
  if (ridge && !(std::isfinite(*ridge) && *ridge >= 0.0)) {
    throw std::invalid_argument("basis ridge must be >= 0");
  }
}

double BasisSpec::ridge_for(std::size_t n_paths) const {
  return ridge ? *ridge : 1e-10 * static_cast<double>(n_paths);
}

std::vector<std::vector<int>> monomial_exponents(std::size_t n_vars, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(n_vars, 0);
  for (int total = 0; total <= degree; ++total) {
    // Enumerate compositions of `total` into n_vars parts (lexicographically).
    auto rec = [&](auto&& self, std::size_t var, int remaining) -> void {
      if (var + 1 == n_vars) {
        e[var] = remaining;
        out.push_back(e);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        e[var] = v;
        self(self, var + 1, remaining - v);
      }
    };
    if (n_vars == 0) {
      if (total == 0) out.emplace_back();
      continue;
    }
    rec(rec, 0, total);
  }
  return out;
}

namespace {

double monomial(const std::vector<int>& exps, std::span<const double> v) {
  double m = 1.0;
  for (std::size_t j = 0; j < exps.size(); ++j) {
    for (int e = 0; e < exps[j]; ++e) m *= v[j];
  }
  return m;
}

}  // namespace

SliceProjector::SliceProjector(const FeatureColumns& columns, int degree, double ridge,
                               std::size_t slice)
    : slice_(slice), n_features_(columns.size()) {
  if (degree < 0) throw std::invalid_argument("basis degree must be >= 0");
  if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be >= 0");
  if (columns.empty()) throw std::invalid_argument("regression needs at least one feature column");
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw std::invalid_argument("feature columns differ in length");
  }

  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& c = columns[j];
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!std::isfinite(sd)) {
      throw std::domain_error("non-finite feature at slice " + std::to_string(slice));
    }
    if (sd > 1e-10 * std::max(1.0, std::abs(mean))) {
      kept_.push_back(j);
      center_.push_back(mean);
      scale_.push_back(sd);
    }
  }

  exponents_ = monomial_exponents(kept_.size(), degree);
  const std::size_t p = exponents_.size();
  if (n < p + 1) {
    throw std::invalid_argument("slice " + std::to_string(slice) + ": " + std::to_string(n) +
                                " paths cannot support a basis of dimension " + std::to_string(p));
  }

  design_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<double> v(kept_.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kept_.size(); ++j) v[j] = (columns[kept_[j]][i] - center_[j]) / scale_[j];
    for (std::size_t q = 0; q < p; ++q) {
      design_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = monomial(exponents_[q], v);
    }
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  gram.selfadjointView<Eigen::Lower>().rankUpdate(design_.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  for (Eigen::Index q = 1; q < gram.rows(); ++q) gram(q, q) += ridge;
  gram_.compute(gram);

  const auto d = gram_.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.minCoeff();
  // Without ridge a relative pivot test catches exact collinearity (frozen
  // slices, duplicated iterates); with ridge the system is definite.
  const bool singular = ridge > 0.0 ? !(dmin > 0.0) : !(dmin > 1e-13 * dmax);
  if (gram_.info() != Eigen::Success || singular) {
    throw SingularRegressionError(slice, "singular regression at slice " + std::to_string(slice) +
                                             " (rank-deficient features; set a positive ridge)");
  }
}

Eigen::VectorXd SliceProjector::solve(std::span<const double> targets) const {
  if (targets.size() != n_paths()) throw std::invalid_argument("target length does not match features");
  const Eigen::Map<const Eigen::VectorXd> y(targets.data(), static_cast<Eigen::Index>(targets.size()));
  if (!y.allFinite()) throw std::domain_error("non-finite regression target at slice " + std::to_string(slice_));
  return gram_.solve(design_.transpose() * y);
}

CondExpSlice SliceProjector::fit(std::span<const double> targets) const {
  CondExpSlice s;
  s.slice = slice_;
  s.n_features = n_features_;
  s.kept = kept_;
  s.center = center_;
  s.scale = scale_;
  s.exponents = exponents_;
  s.coefficients = solve(targets);
  return s;
}

void SliceProjector::project(std::span<const double> targets, std::span<double> out) const {
  if (out.size() != n_paths()) throw std::invalid_argument("output length does not match features");
  Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(out.size()));
  o.noalias() = design_ * solve(targets);
}

std::vector<double> SliceProjector::project(std::span<const double> targets) const {
  std::vector<double> out(n_paths());
  project(targets, out);
  return out;
}

double CondExpSlice::predict(std::span<const double> row) const {
  if (row.size() != n_features) throw std::invalid_argument("feature row has the wrong length");
  std::vector<double> v(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) v[j] = (row[kept[j]] - center[j]) / scale[j];
  double out = 0.0;
  for (std::size_t q = 0; q < exponents.size(); ++q) {
    out += coefficients(static_cast<Eigen::Index>(q)) * monomial(exponents[q], v);
  }
  return out;
}

FeatureColumns state_features(const PathEnsemble& ensemble, std::size_t k, const BasisSpec& basis) {
  FeatureColumns cols{ensemble.X().slice(k)};
  if (basis.include_r) cols.push_back(ensemble.R().slice(k));
  return cols;
}

CondExpSlice fit_condexp(const FeatureColumns& features, std::span<const double> targets,
                         const BasisSpec& basis, std::size_t slice) {
  basis.validate();
  const std::size_t n = features.empty() ? 0 : features.front().size();
  return SliceProjector(features, basis.degree, basis.ridge_for(n), slice).fit(targets);
}

std::vector<double> extract_z(std::span<const double> y_next, std::span<const double> dB,
                              std::span<const double> dL, const SliceProjector& projector,
                              double dl_floor) {
  const std::size_t n = projector.n_paths();
  if (y_next.size() != n || dB.size() != n || dL.size() != n) {
    throw std::invalid_argument("extract_z: inputs differ in length");
  }
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = y_next[i] * dB[i];
  const auto num = projector.project(prod);
  const auto den = projector.project(dL);
  std::vector<double> z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (den[i] >= dl_floor && den[i] > 0.0) z[i] = num[i] / den[i];
  }
  return z;
}

std::vector<double> extract_z(std::span<const double> y_next, std::span<const double> dB,
                              std::span<const double> dL, const FeatureColumns& features,
                              const BasisSpec& basis, double dl_floor, std::size_t slice) {
  basis.validate();
  const std::size_t n = features.empty() ? 0 : features.front().size();
  const SliceProjector projector(features, basis.degree, basis.ridge_for(n), slice);
  return extract_z(y_next, dB, dL, projector, dl_floor);
}

}  // namespace subfbsde
