#include "rydbeat/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rydbeat/error.hpp"

namespace rydbeat {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<double> add_noise(std::span<const double> signal,
                              const NoiseModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(signal.begin(), signal.end());
  if (const auto* p = std::get_if<PoissonNoise>(&model)) {
    if (!(p->peak_counts > 0) || !std::isfinite(p->peak_counts))
      fail(ErrorCode::InvalidInput, "poisson peak_counts must be positive");
    double peak = 0.0;
    for (double v : signal) {
      if (v < 0) fail(ErrorCode::InvalidInput, "poisson noise needs a nonnegative signal");
      peak = std::max(peak, v);
    }
    if (peak == 0.0) return out;
    const double scale = p->peak_counts / peak;
    for (auto& v : out) {
      const double mean = v * scale;
      if (mean > 0) {
        std::poisson_distribution<long long> dist(mean);
        v = static_cast<double>(dist(rng)) / scale;
      }
    }
    return out;
  }
  const auto& g = std::get<GaussianNoise>(model);
  if (!(g.sigma > 0) || !std::isfinite(g.sigma))
    fail(ErrorCode::InvalidInput, "gaussian noise sigma must be positive");
  std::normal_distribution<double> dist(0.0, g.sigma);
  for (auto& v : out) v += dist(rng);
  return out;
}

}  // namespace rydbeat
