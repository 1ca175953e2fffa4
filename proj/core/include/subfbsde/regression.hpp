#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subfbsde/subdiffusion.hpp"

namespace subfbsde {

/// Total-degree polynomial basis on standardised features.
struct BasisSpec {
  int degree = 2;
  bool include_r = true;
  /// Append the current Picard iterate (x, y) to the Markov state features.
  bool include_iterates = true;
  /// Ridge weight on the non-constant basis functions; unset means 1e-10 * n_paths.
  std::optional<double> ridge;

  void validate() const;
  double ridge_for(std::size_t n_paths) const;
};

class SingularRegressionError : public std::runtime_error {
 public:
  SingularRegressionError(std::size_t slice, const std::string& what)
      : std::runtime_error(what), slice_(slice) {}
  std::size_t slice() const noexcept { return slice_; }

 private:
  std::size_t slice_;
};

using FeatureColumns = std::vector<std::span<const double>>;

/// Fitted conditional expectation on one time slice.
struct CondExpSlice {
  std::size_t slice = 0;
  std::size_t n_features = 0;        // raw feature columns supplied to the fit
  std::vector<std::size_t> kept;     // non-constant columns, in order
  std::vector<double> center, scale; // per kept column
  std::vector<std::vector<int>> exponents;
  Eigen::VectorXd coefficients;

  /// Prediction at one raw feature row (all n_features columns).
  double predict(std::span<const double> row) const;
};

/// Least-squares projector for one slice: the design matrix is factorised once
/// and reused for every target projected on the same features. Columns whose
/// sample spread is at rounding level are dropped, so constant targets are
/// reproduced exactly (the intercept is not penalised).
class SliceProjector {
 public:
  SliceProjector(const FeatureColumns& columns, int degree, double ridge, std::size_t slice = 0);

  std::size_t n_paths() const noexcept { return static_cast<std::size_t>(design_.rows()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(design_.cols()); }

  CondExpSlice fit(std::span<const double> targets) const;
  /// Fitted values at the sample points.
  void project(std::span<const double> targets, std::span<double> out) const;
  std::vector<double> project(std::span<const double> targets) const;

 private:
  Eigen::VectorXd solve(std::span<const double> targets) const;

  std::size_t slice_;
  std::size_t n_features_;
  std::vector<std::size_t> kept_;
  std::vector<double> center_, scale_;
  std::vector<std::vector<int>> exponents_;
  Eigen::MatrixXd design_;
  Eigen::LDLT<Eigen::MatrixXd> gram_;
};

/// Graded exponent list of all monomials of total degree <= degree in n variables.
std::vector<std::vector<int>> monomial_exponents(std::size_t n_vars, int degree);

/// Slice-k Markov features (X, and R when basis.include_r).
FeatureColumns state_features(const PathEnsemble& ensemble, std::size_t k, const BasisSpec& basis);

CondExpSlice fit_condexp(const FeatureColumns& features, std::span<const double> targets,
                         const BasisSpec& basis, std::size_t slice = 0);

/// z_k = E[y_{k+1} dB_k | F_k] / E[dL_k | F_k], and 0 wherever the predicted
/// dL_k is below `dl_floor` (z is only defined dL-almost everywhere).
std::vector<double> extract_z(std::span<const double> y_next, std::span<const double> dB,
                              std::span<const double> dL, const SliceProjector& projector,
                              double dl_floor);
std::vector<double> extract_z(std::span<const double> y_next, std::span<const double> dB,
                              std::span<const double> dL, const FeatureColumns& features,
                              const BasisSpec& basis, double dl_floor, std::size_t slice = 0);

}  // namespace subfbsde
