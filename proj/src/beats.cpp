#include "rydbeat/beats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

#include "fft.hpp"
#include "json.hpp"
#include "rydbeat/error.hpp"
#include "rydbeat/grid.hpp"

namespace rydbeat {

const char* to_string(Window w) noexcept { return w == Window::Hann ? "hann" : "rect"; }

Window parse_window(std::string_view text) {
  if (text == "hann") return Window::Hann;
  if (text == "rect") return Window::Rect;
  fail(ErrorCode::InvalidInput, "unknown window '" + std::string(text) + "'");
}

std::string BeatCandidate::label() const { return a.label() + "-" + b.label(); }

// ---------------------------------------------------------------------------

namespace {

std::vector<double> moving_mean(std::span<const double> y, std::size_t half) {
  std::vector<double> out(y.size());
  std::vector<double> prefix(y.size() + 1, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) prefix[i + 1] = prefix[i] + y[i];
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(y.size() - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// Frequency of the strongest non-DC spectral bin of `trace`, in THz.
double dominant_frequency(const TimeTrace& trace) {
  if (trace.t.size() < 8) return 0.0;
  const auto spec = power_spectrum(trace, Window::Hann, 4);
  std::size_t best = 0;
  for (std::size_t k = 1; k < spec.power.size(); ++k) {
    if (spec.freq_thz[k] < 1.5 * spec.native_resolution_thz) continue;
    if (best == 0 || spec.power[k] > spec.power[best]) best = k;
  }
  return best == 0 ? 0.0 : spec.freq_thz[best];
}

}  // namespace

DetrendResult detrend(const TimeTrace& trace, const DetrendOptions& options) {
  DetrendResult out;
  out.residual = trace;
  if (options.method == DetrendMethod::EmgResidual) {
    FitResult fit;
    try {
      fit = fit_lifetime(trace, options.fit);
    } catch (const Error& e) {
      fail(e.code(), std::string("detrend: lifetime fit failed: ") + e.what());
    }
    const auto model = emg_from_fit(fit);
    for (std::size_t i = 0; i < trace.t.size(); ++i)
      out.residual.intensity[i] = trace.intensity[i] - emg_eval(model, trace.t[i]);
    if (!fit.converged) out.flags.emplace_back("lifetime_fit_not_converged");
    out.fit = std::move(fit);
    return out;
  }
  const double dt = uniform_step(trace.t);
  if (!(options.moving_mean_width_ps > 0))
    fail(ErrorCode::InvalidInput, "moving mean width must be positive");
  const auto half = static_cast<std::size_t>(std::round(0.5 * options.moving_mean_width_ps / dt));
  const auto smooth = moving_mean(trace.intensity, half);
  for (std::size_t i = 0; i < trace.t.size(); ++i)
    out.residual.intensity[i] = trace.intensity[i] - smooth[i];
  const double nu = dominant_frequency(out.residual);
  if (nu > 0 && options.moving_mean_width_ps < 3.0 / nu)
    out.flags.emplace_back("moving_mean_too_narrow");
  return out;
}

BeatSpectrum power_spectrum(const TimeTrace& trace, Window window, int pad_factor) {
  if (pad_factor < 1) fail(ErrorCode::InvalidInput, "pad_factor must be >= 1");
  if (trace.t.size() != trace.intensity.size())
    fail(ErrorCode::InvalidInput, "trace time/intensity size mismatch");
  if (trace.t.size() < 32) fail(ErrorCode::InvalidInput, "power spectrum needs >= 32 samples");
  const double dt = uniform_step(trace.t);
  const std::size_t n = trace.t.size();
  const std::size_t len = n * static_cast<std::size_t>(pad_factor);

  std::vector<double> x(trace.intensity.begin(), trace.intensity.end());
  if (window == Window::Hann) {
    for (std::size_t i = 0; i < n; ++i)
      x[i] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(n - 1));
  }
  const auto spec = detail::real_dft(x, len);

  BeatSpectrum out;
  out.window = window;
  out.pad_factor = pad_factor;
  out.native_resolution_thz = 1.0 / (static_cast<double>(n) * dt);
  const double df = 1.0 / (static_cast<double>(len) * dt);
  out.freq_thz.resize(spec.size());
  out.power.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    out.freq_thz[k] = static_cast<double>(k) * df;
    const bool unpaired = k == 0 || (len % 2 == 0 && k == len / 2);
    out.power[k] = (unpaired ? 1.0 : 2.0) * std::norm(spec[k]) / static_cast<double>(len);
  }
  return out;
}

std::vector<BeatPeak> find_peaks(const BeatSpectrum& spectrum, const PeakOptions& options) {
  const auto& p = spectrum.power;
  const auto& f = spectrum.freq_thz;
  std::vector<BeatPeak> peaks;
  if (p.size() < 4) return peaks;

  std::size_t first = 0;
  while (first < f.size() && f[first] < 1.5 * spectrum.native_resolution_thz) ++first;
  if (first == 0) first = 1;
  if (first + 2 >= p.size()) return peaks;

  std::vector<std::size_t> maxima;
  for (std::size_t i = first; i + 1 < p.size(); ++i)
    if (p[i] > p[i - 1] && p[i] >= p[i + 1]) maxima.push_back(i);
  if (maxima.empty()) return peaks;
  double top = 0.0;
  for (std::size_t i : maxima) top = std::max(top, p[i]);
  if (!(top > 0)) return peaks;

  std::vector<double> region(p.begin() + static_cast<std::ptrdiff_t>(first), p.end());

  // Exponentially distributed noise bins: mean = median / ln 2. The number
  // of independent trials is the count of native bins in the search region.
  std::nth_element(region.begin(), region.begin() + static_cast<std::ptrdiff_t>(region.size() / 2),
                   region.end());
  const double noise_mean = region[region.size() / 2] / std::numbers::ln2;
  const double trials = std::max(1.0, static_cast<double>(p.size() - first) /
                                          static_cast<double>(spectrum.pad_factor));
  const double threshold = noise_mean * std::log(trials / options.false_alarm);

  const double df = f[1] - f[0];
  for (std::size_t i : maxima) {
    // Topographic prominence within the search region.
    double left_min = p[i];
    std::size_t j = i;
    while (j > first) {
      --j;
      if (p[j] > p[i]) break;
      left_min = std::min(left_min, p[j]);
    }
    double right_min = p[i];
    for (std::size_t k = i + 1; k < p.size(); ++k) {
      if (p[k] > p[i]) break;
      right_min = std::min(right_min, p[k]);
    }
    const double prominence = p[i] - std::max(left_min, right_min);
    if (prominence < options.min_prominence * top) continue;
    if (p[i] < threshold) continue;

    const double a = std::log(std::max(p[i - 1], 1e-300));
    const double b = std::log(p[i]);
    const double c = std::log(std::max(p[i + 1], 1e-300));
    const double den = a - 2.0 * b + c;
    const double delta = den < 0 ? std::clamp(0.5 * (a - c) / den, -0.5, 0.5) : 0.0;

    BeatPeak peak;
    peak.nu_thz = (static_cast<double>(i) + delta) * df;
    peak.nu_err_thz = std::max(0.5 * spectrum.native_resolution_thz, std::abs(delta) * df);
    peak.energy_meV = phys::kPlanck * peak.nu_thz;
    peak.energy_err_meV = phys::kPlanck * peak.nu_err_thz;
    peak.amplitude = p[i];
    peaks.push_back(peak);
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const BeatPeak& x, const BeatPeak& y) { return x.amplitude > y.amplitude; });
  if (!peaks.empty()) {
    const double strongest = peaks.front().amplitude;
    for (auto& pk : peaks) pk.amplitude /= strongest;
    peaks.front().rank = PeakRank::Major;
  }
  return peaks;
}

namespace {

bool matches_anchor(const StateId& id, const StateId& anchor) {
  if (id.n != anchor.n || id.series != anchor.series || id.color != anchor.color) return false;
  return anchor.sublevel == 0 || anchor.sublevel == id.sublevel;
}

bool beat_series(Series s) { return s == Series::S || s == Series::D || s == Series::F; }
bool neighbor_series(Series s) { return s == Series::S || s == Series::D; }

}  // namespace

std::vector<BeatAssignment> assign_peaks(const std::vector<BeatPeak>& peaks,
                                         const StateCatalog& catalog, double tolerance_meV,
                                         const AssignOptions& options) {
  if (catalog.records().empty()) fail(ErrorCode::InvalidInput, "empty catalog");
  std::vector<StateId> pool;
  for (const auto& id : catalog.known_states())
    if (id.color == SeriesColor::Yellow && beat_series(id.series)) pool.push_back(id);
  for (const auto& anchor : options.anchors) {
    const bool known = std::any_of(pool.begin(), pool.end(),
                                   [&](const StateId& id) { return matches_anchor(id, anchor); });
    if (!known) fail(ErrorCode::NotFound, "state " + anchor.label() + " not in catalog");
  }
  auto anchored = [&](const StateId& id) {
    return std::any_of(options.anchors.begin(), options.anchors.end(),
                       [&](const StateId& a) { return matches_anchor(id, a); });
  };

  // Candidate pairs with their splits, anchor first when anchored.
  std::vector<BeatCandidate> pairs;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      StateId a = pool[i];
      StateId b = pool[j];
      const bool same_n = a.n == b.n;
      const bool neighbor = options.include_neighbor_n && std::abs(a.n - b.n) == 1 &&
                            neighbor_series(a.series) && neighbor_series(b.series);
      if (!same_n && !neighbor) continue;
      if (!options.anchors.empty()) {
        if (anchored(b) && !anchored(a)) std::swap(a, b);
        if (!anchored(a)) continue;
      }
      SplitResult split;
      try {
        split = energy_split(a, b, catalog);
      } catch (const Error&) {
        continue;  // no record and no quoted split
      }
      pairs.push_back({a, b, split.split_meV, split.overridden, 0.0});
    }
  }

  std::vector<BeatAssignment> out;
  out.reserve(peaks.size());
  for (const auto& peak : peaks) {
    BeatAssignment row;
    row.peak = peak;
    for (auto c : pairs) {
      c.mismatch_meV = std::abs(c.split_meV - peak.energy_meV);
      if (c.mismatch_meV <= tolerance_meV) row.candidates.push_back(c);
    }
    std::sort(row.candidates.begin(), row.candidates.end(),
              [](const BeatCandidate& x, const BeatCandidate& y) {
                if (x.mismatch_meV != y.mismatch_meV) return x.mismatch_meV < y.mismatch_meV;
                return std::tie(x.a, x.b) < std::tie(y.a, y.b);
              });
    out.push_back(std::move(row));
  }
  return out;
}

BeatReport beat_report(const TimeTrace& trace, const StateCatalog& catalog,
                       const BeatReportOptions& options) {
  if (trace.t.size() != trace.intensity.size() || trace.t.size() < 32)
    fail(ErrorCode::InvalidInput, "beat analysis needs a trace of at least 32 samples");
  uniform_step(trace.t);

  BeatReport report;
  auto detrended = detrend(trace, options.detrend);
  report.flags = detrended.flags;
  report.lifetime_fit = detrended.fit;

  const auto peak_it = std::max_element(trace.intensity.begin(), trace.intensity.end());
  const double t_peak = trace.t[static_cast<std::size_t>(peak_it - trace.intensity.begin())];
  report.window_start_ps = t_peak + options.start_after_peak_ps;
  report.window_end_ps = options.window_end_ps.value_or(trace.t.back());

  TimeTrace window;
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    if (trace.t[i] < report.window_start_ps || trace.t[i] > report.window_end_ps) continue;
    window.t.push_back(trace.t[i]);
    window.intensity.push_back(detrended.residual.intensity[i]);
  }
  if (window.t.size() < 32)
    fail(ErrorCode::InsufficientData, "analysis window holds fewer than 32 samples");

  // Remove the residual mean and slope so slow misfit does not leak into
  // the low-frequency bins.
  {
    const double n = static_cast<double>(window.t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < window.t.size(); ++i) {
      st += window.t[i];
      sy += window.intensity[i];
      stt += window.t[i] * window.t[i];
      sty += window.t[i] * window.intensity[i];
    }
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    const double icpt = (sy - slope * st) / n;
    for (std::size_t i = 0; i < window.t.size(); ++i)
      window.intensity[i] -= icpt + slope * window.t[i];
  }

  report.spectrum = power_spectrum(window, options.window, options.pad_factor);
  // A residual at rounding level carries no beats.
  double ss = 0.0;
  for (double v : window.intensity) ss += v * v;
  const double rms = std::sqrt(ss / static_cast<double>(window.t.size()));
  if (rms <= 1e-9 * std::abs(*peak_it)) {
    report.flags.emplace_back("residual_at_rounding_level");
    return report;
  }
  const auto peaks = find_peaks(report.spectrum, options.peaks);
  report.rows = assign_peaks(peaks, catalog, options.tolerance_meV, options.assign);
  return report;
}

std::string beat_report_json(const BeatReport& report, int indent) {
  nlohmann::ordered_json doc;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["rank"] = row.peak.rank == PeakRank::Major ? "major" : "minor";
    r["freq_thz"] = row.peak.nu_thz;
    r["freq_err_thz"] = row.peak.nu_err_thz;
    r["energy_meV"] = row.peak.energy_meV;
    r["energy_err_meV"] = row.peak.energy_err_meV;
    r["relative_power"] = row.peak.amplitude;
    auto cands = nlohmann::ordered_json::array();
    for (const auto& c : row.candidates) {
      cands.push_back({{"pair", c.label()},
                       {"split_meV", c.split_meV},
                       {"split_source", c.overridden ? "quoted" : "catalog"},
                       {"mismatch_meV", c.mismatch_meV}});
    }
    r["candidates"] = cands;
    rows.push_back(r);
  }
  doc["peaks"] = rows;
  doc["window_start_ps"] = report.window_start_ps;
  doc["window_end_ps"] = report.window_end_ps;
  doc["native_resolution_thz"] = report.spectrum.native_resolution_thz;
  doc["window"] = to_string(report.spectrum.window);
  doc["pad_factor"] = report.spectrum.pad_factor;
  if (report.lifetime_fit) {
    doc["lifetime_ps"] = report.lifetime_fit->value("tau");
    doc["lifetime_sigma_ps"] = report.lifetime_fit->sigma("tau");
  }
  doc["flags"] = report.flags;
  return doc.dump(indent);
}

std::string beat_report_text(const BeatReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %16s %18s  %s\n", "rank", "freq (THz)",
                "energy (meV)", "likely beating (split meV)");
  out << line;
  for (const auto& row : report.rows) {
    std::string cands;
    for (const auto& c : row.candidates) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%s (%.2f%s)", cands.empty() ? "" : ", ",
                    c.label().c_str(), c.split_meV, c.overridden ? "*" : "");
      cands += buf;
    }
    if (cands.empty()) cands = "-";
    std::snprintf(line, sizeof line, "%-6s %7.3f +- %5.3f %8.3f +- %6.3f  %s\n",
                  row.peak.rank == PeakRank::Major ? "major" : "minor", row.peak.nu_thz,
                  row.peak.nu_err_thz, row.peak.energy_meV, row.peak.energy_err_meV,
                  cands.c_str());
    out << line;
  }
  if (report.rows.empty()) out << "(no beat frequencies above threshold)\n";
  return out.str();
}

}  // namespace rydbeat
