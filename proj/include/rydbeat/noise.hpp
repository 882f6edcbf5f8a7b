#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace rydbeat {

/// Shot noise where the signal maximum corresponds to `peak_counts` counts.
/// Output is rescaled to the input units.
struct PoissonNoise {
  double peak_counts = 1e5;
};

struct GaussianNoise {
  double sigma = 1.0;
};

using NoiseModel = std::variant<PoissonNoise, GaussianNoise>;

/// Independent stream seed for (seed, stream) pairs; splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

std::vector<double> add_noise(std::span<const double> signal,
                              const NoiseModel& model, std::uint64_t seed);

}  // namespace rydbeat
