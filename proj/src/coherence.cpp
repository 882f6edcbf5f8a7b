#include "rydbeat/coherence.hpp"

#include <algorithm>
#include <cmath>

#include "rydbeat/error.hpp"

namespace rydbeat {

namespace {

void check_stack(std::span<const FringeImage> stack) {
  if (stack.empty()) fail(ErrorCode::InsufficientData, "empty fringe stack");
  const auto& first = stack.front();
  if (first.x.empty() || first.e.empty())
    fail(ErrorCode::InvalidInput, "fringe image without pixels or energies");
  for (const auto& img : stack) {
    if (img.e != first.e || img.x.size() != first.x.size())
      fail(ErrorCode::InvalidInput, "fringe images do not share one grid");
    if (img.intensity.size() != img.x.size())
      fail(ErrorCode::InvalidInput, "fringe image row count does not match pixel grid");
    for (const auto& row : img.intensity)
      if (row.size() != img.e.size())
        fail(ErrorCode::InvalidInput, "fringe image column count does not match energy grid");
  }
}

std::vector<double> column_totals(std::span<const FringeImage> stack) {
  std::vector<double> total(stack.front().e.size(), 0.0);
  for (const auto& img : stack)
    for (const auto& row : img.intensity)
      for (std::size_t j = 0; j < row.size(); ++j) total[j] += row[j];
  return total;
}

std::vector<double> channel_centers(const std::vector<double>& e,
                                    const std::vector<double>& total, double floor) {
  std::vector<double> centers;
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (total[j] < floor) continue;
    const bool left = j == 0 || total[j] > total[j - 1];
    const bool right = j + 1 == e.size() || total[j] >= total[j + 1];
    if (left && right) centers.push_back(e[j]);
  }
  return centers;
}

}  // namespace

CoherenceResult analyze_fringe_stack(std::span<const FringeImage> stack,
                                     const CoherenceOptions& options) {
  check_stack(stack);
  if (!(options.channel_half_width_meV >= 0))
    fail(ErrorCode::InvalidInput, "channel half width must be nonnegative");
  const auto& e = stack.front().e;
  const auto total = column_totals(stack);
  const double brightest = *std::max_element(total.begin(), total.end());
  const double floor = options.min_relative_intensity * brightest;

  std::vector<double> centers;
  if (options.channel_center_meV) centers.push_back(*options.channel_center_meV);
  else centers = channel_centers(e, total, floor);

  std::vector<double> x(stack.front().x);
  std::vector<double> slice(x.size());

  CoherenceResult result;
  for (double center : centers) {
    ChannelCoherence ch;
    ch.center_meV = center;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < e.size(); ++j)
      if (std::abs(e[j] - center) <= options.channel_half_width_meV + 1e-12 && total[j] >= floor)
        cols.push_back(j);
    if (cols.empty()) {
      // Fall back to the nearest column so a requested channel always exists.
      std::size_t best = 0;
      for (std::size_t j = 1; j < e.size(); ++j)
        if (std::abs(e[j] - center) < std::abs(e[best] - center)) best = j;
      cols.push_back(best);
    }
    ch.columns = cols.size();

    for (const auto& img : stack) {
      double sw = 0.0, swc = 0.0, plain = 0.0;
      std::size_t used = 0;
      for (std::size_t j : cols) {
        for (std::size_t i = 0; i < x.size(); ++i) slice[i] = img.intensity[i][j];
        FitResult fit;
        try {
          fit = fit_fringe_slice(x, slice);
        } catch (const Error&) {
          continue;
        }
        const double c = fit.value("C");
        const double s = fit.sigma("C");
        plain += c;
        ++used;
        if (s > 0 && std::isfinite(s)) {
          sw += 1.0 / (s * s);
          swc += c / (s * s);
        }
      }
      if (used == 0) continue;
      ContrastPoint p;
      p.delay_ps = img.delay_ps;
      if (sw > 0) {
        p.contrast = swc / sw;
        p.sigma = 1.0 / std::sqrt(sw);
      } else {
        p.contrast = plain / static_cast<double>(used);
        p.sigma = 0.0;
      }
      ch.points.push_back(p);
    }
    std::sort(ch.points.begin(), ch.points.end(),
              [](const ContrastPoint& a, const ContrastPoint& b) { return a.delay_ps < b.delay_ps; });
    try {
      ch.decay = fit_contrast_decay(ch.points, options.shape);
    } catch (const Error& err) {
      ch.error = std::string(to_string(err.code())) + ": " + err.what();
    }
    result.channels.push_back(std::move(ch));
  }
  return result;
}

}  // namespace rydbeat
