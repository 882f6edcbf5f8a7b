#include "rydbeat/grid.hpp"

#include <cmath>

#include "rydbeat/error.hpp"

namespace rydbeat {

std::vector<double> UniformGrid::values() const {
  std::vector<double> out(size);
  for (std::size_t i = 0; i < size; ++i) {
    // Snap to 1e-9 so decimal steps print as written (0.9, not 0.8999999...).
    const double v = (*this)[i];
    const double snapped = std::round(v * 1e9) / 1e9;
    out[i] = std::abs(v) < 1e6 && std::abs(snapped - v) < 1e-6 * step ? snapped : v;
  }
  return out;
}

UniformGrid UniformGrid::from_range(double start, double stop, double step) {
  if (!(step > 0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start)
    fail(ErrorCode::InvalidInput, "grid needs finite start <= stop and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  return {start, step, n};
}

double uniform_step(std::span<const double> points) {
  if (points.size() < 2) fail(ErrorCode::InvalidInput, "grid needs at least 2 points");
  const double step = (points.back() - points.front()) /
                      static_cast<double>(points.size() - 1);
  if (!(step > 0) || !std::isfinite(step))
    fail(ErrorCode::InvalidInput, "grid must be strictly increasing");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (std::abs(points[i] - points[i - 1] - step) > 1e-6 * step)
      fail(ErrorCode::InvalidInput, "grid is not uniform");
  }
  return step;
}

}  // namespace rydbeat
