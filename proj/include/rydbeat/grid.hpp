#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rydbeat {

/// start + i * step for i in [0, size).
struct UniformGrid {
  double start = 0.0;
  double step = 1.0;
  std::size_t size = 0;

  double operator[](std::size_t i) const noexcept {
    return start + step * static_cast<double>(i);
  }
  double back() const noexcept { return (*this)[size - 1]; }
  double span() const noexcept { return step * static_cast<double>(size); }
  std::vector<double> values() const;

  /// Inclusive of `stop` when it lands on the grid (to 1e-9 of a step).
  static UniformGrid from_range(double start, double stop, double step);
};

/// Returns the spacing of `points`, throwing InvalidInput unless they are
/// strictly increasing with constant step (relative tolerance 1e-6).
double uniform_step(std::span<const double> points);

}  // namespace rydbeat
