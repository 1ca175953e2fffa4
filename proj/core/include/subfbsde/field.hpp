#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace subfbsde {

/// Ensemble-valued quantity on a time grid, stored slice-major: all paths of
/// slice k are contiguous, which is the access pattern of the per-slice
/// regressions.
class Field {
 public:
  Field() = default;
  Field(std::size_t n_slices, std::size_t n_paths, double fill = 0.0)
      : n_slices_(n_slices), n_paths_(n_paths), data_(n_slices * n_paths, fill) {}

  std::size_t n_slices() const noexcept { return n_slices_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t k, std::size_t p) noexcept {
    assert(k < n_slices_ && p < n_paths_);
    return data_[k * n_paths_ + p];
  }
  double operator()(std::size_t k, std::size_t p) const noexcept {
    assert(k < n_slices_ && p < n_paths_);
    return data_[k * n_paths_ + p];
  }

  std::span<double> slice(std::size_t k) noexcept { return {data_.data() + k * n_paths_, n_paths_}; }
  std::span<const double> slice(std::size_t k) const noexcept {
    return {data_.data() + k * n_paths_, n_paths_};
  }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  bool same_shape(const Field& other) const noexcept {
    return n_slices_ == other.n_slices_ && n_paths_ == other.n_paths_;
  }

  Field& operator+=(const Field& other) {
    assert(same_shape(other));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  Field& operator-=(const Field& other) {
    assert(same_shape(other));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  Field& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  bool operator==(const Field&) const = default;

 private:
  std::size_t n_slices_ = 0;
  std::size_t n_paths_ = 0;
  std::vector<double> data_;
};

}  // namespace subfbsde
