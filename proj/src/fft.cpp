#include "fft.hpp"

#include <algorithm>
#include <mutex>

#include <fftw3.h>

#include "rydbeat/error.hpp"

namespace rydbeat::detail {

namespace {
// FFTW planning is not thread-safe; execution with distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<std::complex<double>> real_dft(std::span<const double> x, std::size_t length) {
  if (length < x.size() || length == 0)
    fail(ErrorCode::InvalidInput, "DFT length shorter than input");
  const std::size_t bins = length / 2 + 1;
  double* in = fftw_alloc_real(length);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(length), in, out, FFTW_ESTIMATE);
  }
  std::fill(in, in + length, 0.0);
  std::copy(x.begin(), x.end(), in);
  fftw_execute(plan);
  std::vector<std::complex<double>> result(bins);
  for (std::size_t k = 0; k < bins; ++k) result[k] = {out[k][0], out[k][1]};
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return result;
}

}  // namespace rydbeat::detail
