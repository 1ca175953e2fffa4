#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "subfbsde/coefficients.hpp"
#include "subfbsde/solution.hpp"

namespace subfbsde {

/// Monte Carlo estimate of (E[x(0)^2 + int (x^2 + y^2) dt + int z^2 dL])^{1/2},
/// left-point sums on both clocks.
struct MNormValue {
  double value = 0.0;
  double x0_part = 0.0;
  double dt_part = 0.0;
  double dL_part = 0.0;
};

MNormValue m_norm(const SolutionTriple& theta);
double m_norm_distance(const SolutionTriple& a, const SolutionTriple& b);

/// Same functional with |Theta|^2 integrated against dt + dL instead. By
/// 0 <= dL <= dt/kappa it lies between m_norm and sqrt(1 + 1/kappa) m_norm.
double variant_m_norm(const SolutionTriple& theta);

/// Per-path sup_k (x^2 + y^2) on the grid.
std::vector<double> sup_xy_squared(const SolutionTriple& theta);

/// r[i+1] / r[i] for all consecutive residuals.
std::vector<double> successive_ratios(std::span<const double> residuals);

/// Geometric mean of the successive ratios after dropping the first residual.
/// Throws std::invalid_argument unless there are >= 3 residuals, all positive.
double contraction_fit(std::span<const double> residuals);

/// E[lhs] / E[rhs] with a 200-resample bootstrap standard error of the ratio.
struct RatioReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double lhs_se = 0.0;
  double ratio_se = 0.0;
  bool degenerate = false;  // 0/0, reported as ratio 0
  bool violation = false;   // rhs == 0 < lhs
};

inline constexpr std::size_t kBootstrapResamples = 200;

RatioReport ratio_report(std::span<const double> lhs, std::span<const double> rhs,
                         std::uint64_t seed = 0x5eed);

/// Left-hand and right-hand side of the a priori estimate for the nonlinear
/// equation: RHS from x0^2, phi(0)^2 and the zero-point coefficient values.
RatioReport apriori_ratio(const SolutionTriple& theta, const CoefficientBundle& bundle, double x0);

}  // namespace subfbsde
