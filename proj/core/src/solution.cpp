#include "subfbsde/solution.hpp"

#include <cmath>
#include <stdexcept>

namespace subfbsde {

SolutionTriple SolutionTriple::zeros(std::shared_ptr<const PathEnsemble> ensemble, double x0) {
  if (!ensemble) throw std::invalid_argument("solution needs an ensemble");
  SolutionTriple s;
  const std::size_t n = ensemble->n_steps() + 1;
  const std::size_t m = ensemble->n_paths();
  s.x = Field(n, m);
  s.y = Field(n, m);
  s.z = Field(n, m);
  s.x0 = x0;
  s.ensemble = std::move(ensemble);
  return s;
}

SolutionTriple& SolutionTriple::operator+=(const SolutionTriple& other) {
  if (!x.same_shape(other.x)) throw std::invalid_argument("solution shapes differ");
  x += other.x;
  y += other.y;
  z += other.z;
  x0 += other.x0;
  return *this;
}

SolutionTriple& SolutionTriple::operator-=(const SolutionTriple& other) {
  if (!x.same_shape(other.x)) throw std::invalid_argument("solution shapes differ");
  x -= other.x;
  y -= other.y;
  z -= other.z;
  x0 -= other.x0;
  return *this;
}

SolutionTriple& SolutionTriple::operator*=(double s) {
  x *= s;
  y *= s;
  z *= s;
  x0 *= s;
  return *this;
}

ForcingSet ForcingSet::zeros(std::size_t n_steps, std::size_t n_paths) {
  ForcingSet f;
  f.b0 = f.g0 = f.delta0 = f.h0 = f.sigma0 = Field(n_steps, n_paths);
  f.phi0.assign(n_paths, 0.0);
  return f;
}

void ForcingSet::validate(const PathEnsemble& ensemble) const {
  const Field shape(ensemble.n_steps(), ensemble.n_paths());
  for (const Field* f : {&b0, &g0, &delta0, &h0, &sigma0}) {
    if (!f->same_shape(shape)) throw std::invalid_argument("forcing shape does not match the ensemble");
    for (double v : f->values()) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite forcing value");
    }
  }
  if (phi0.size() != ensemble.n_paths()) throw std::invalid_argument("phi0 length does not match the ensemble");
  for (double v : phi0) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite terminal forcing");
  }
}

ForcingSet& ForcingSet::operator+=(const ForcingSet& other) {
  if (!b0.same_shape(other.b0) || phi0.size() != other.phi0.size()) {
    throw std::invalid_argument("forcing shapes differ");
  }
  b0 += other.b0;
  g0 += other.g0;
  delta0 += other.delta0;
  h0 += other.h0;
  sigma0 += other.sigma0;
  for (std::size_t p = 0; p < phi0.size(); ++p) phi0[p] += other.phi0[p];
  return *this;
}

ForcingSet& ForcingSet::operator*=(double s) {
  b0 *= s;
  g0 *= s;
  delta0 *= s;
  h0 *= s;
  sigma0 *= s;
  for (double& v : phi0) v *= s;
  return *this;
}

}  // namespace subfbsde
