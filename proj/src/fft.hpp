#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rydbeat::detail {

/// Non-negative-frequency half of the DFT of `x` zero-padded to `length`
/// (length / 2 + 1 bins).
std::vector<std::complex<double>> real_dft(std::span<const double> x, std::size_t length);

}  // namespace rydbeat::detail
