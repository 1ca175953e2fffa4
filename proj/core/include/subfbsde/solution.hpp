#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "subfbsde/field.hpp"
#include "subfbsde/subdiffusion.hpp"

namespace subfbsde {

/// Grid values of Theta = (x, y, z) on a path ensemble. All three fields have
/// n_steps + 1 slices; z is used on slices 0..n-1 only (left-point dL
/// integrals) and kept at 0 on slice n.
struct SolutionTriple {
  std::shared_ptr<const PathEnsemble> ensemble;
  double x0 = 0.0;
  Field x, y, z;

  static SolutionTriple zeros(std::shared_ptr<const PathEnsemble> ensemble, double x0 = 0.0);

  std::size_t n_paths() const noexcept { return x.n_paths(); }
  std::size_t n_steps() const noexcept { return x.n_slices() == 0 ? 0 : x.n_slices() - 1; }

  SolutionTriple& operator+=(const SolutionTriple& other);
  SolutionTriple& operator-=(const SolutionTriple& other);
  SolutionTriple& operator*=(double s);
  friend SolutionTriple operator+(SolutionTriple a, const SolutionTriple& b) { return a += b; }
  friend SolutionTriple operator-(SolutionTriple a, const SolutionTriple& b) { return a -= b; }
  friend SolutionTriple operator*(double s, SolutionTriple a) { return a *= s; }
};

/// Exogenous data of the linear equation: dt forcings b0, g0 and dL forcings
/// delta0, h0, sigma0 on slices 0..n-1 (left points), terminal shift phi0 per path.
struct ForcingSet {
  Field b0, g0, delta0, h0, sigma0;
  std::vector<double> phi0;

  static ForcingSet zeros(std::size_t n_steps, std::size_t n_paths);

  std::size_t n_steps() const noexcept { return b0.n_slices(); }
  std::size_t n_paths() const noexcept { return phi0.size(); }

  /// Throws std::invalid_argument on shape mismatch or non-finite entries.
  void validate(const PathEnsemble& ensemble) const;

  ForcingSet& operator+=(const ForcingSet& other);
  ForcingSet& operator*=(double s);
  friend ForcingSet operator+(ForcingSet a, const ForcingSet& b) { return a += b; }
  friend ForcingSet operator*(double s, ForcingSet a) { return a *= s; }
  bool operator==(const ForcingSet&) const = default;
};

}  // namespace subfbsde
