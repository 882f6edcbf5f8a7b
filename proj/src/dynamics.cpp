#include "rydbeat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rydbeat/error.hpp"
#include "rydbeat/grid.hpp"

namespace rydbeat {

namespace {

constexpr double kTailSigmas = 8.5;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNodes[8] = {-0.9602898564975363, -0.7966664774136267,
                                -0.5255324099163290, -0.1834346424956498,
                                0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {0.1012285362903763, 0.2223810344533745,
                                  0.3137066458778873, 0.3626837833783620,
                                  0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};

double gaussian_pdf(double x, double sigma) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Log of the amplitude-level channel weight; -inf never occurs for finite
// inputs so weights can be renormalized safely.
double log_weight(const std::optional<Channel>& channel, double energy_meV) {
  if (!channel) return 0.0;
  const double d = energy_meV - channel->center_meV;
  return -d * d / (4.0 * channel->sigma_meV * channel->sigma_meV);
}

// Fastest angular beat frequency (rad/ps) among emitter pairs.
double fastest_beat(const EmitterSet& set) {
  double emax = -std::numeric_limits<double>::infinity();
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& e : set.emitters) {
    emax = std::max(emax, e.energy_meV);
    emin = std::min(emin, e.energy_meV);
  }
  return set.emitters.size() < 2 ? 0.0 : (emax - emin) / phys::kHbar;
}

// Composite Gauss-Legendre quadrature of f(s) g(t - s) over s >= 0, where g is
// the IRF. Rows of kernel weights are precomputed so several integrands
// (spectrogram columns) share the work.
class IrfConvolver {
 public:
  IrfConvolver(std::span<const double> t_grid, double sigma, double max_panel)
      : sigma_(sigma) {
    const double upper = t_grid.back() + kTailSigmas * sigma;
    if (upper > 0) {
      const double panel = std::min(0.5 * sigma, max_panel);
      const auto panels = static_cast<std::size_t>(std::ceil(upper / panel));
      const double h = upper / static_cast<double>(panels);
      nodes_.reserve(panels * 8);
      weights_.reserve(panels * 8);
      for (std::size_t p = 0; p < panels; ++p) {
        const double mid = (static_cast<double>(p) + 0.5) * h;
        for (int q = 0; q < 8; ++q) {
          nodes_.push_back(mid + 0.5 * h * kGlNodes[q]);
          weights_.push_back(0.5 * h * kGlWeights[q]);
        }
      }
    }
    rows_.reserve(t_grid.size());
    for (double t : t_grid) {
      Row row;
      const auto lo = std::lower_bound(nodes_.begin(), nodes_.end(), t - kTailSigmas * sigma);
      const auto hi = std::upper_bound(nodes_.begin(), nodes_.end(), t + kTailSigmas * sigma);
      row.first = static_cast<std::size_t>(lo - nodes_.begin());
      row.kernel.reserve(static_cast<std::size_t>(hi - lo));
      for (auto it = lo; it != hi; ++it)
        row.kernel.push_back(weights_[static_cast<std::size_t>(it - nodes_.begin())] *
                             gaussian_pdf(t - *it, sigma));
      rows_.push_back(std::move(row));
    }
  }

  const std::vector<double>& nodes() const noexcept { return nodes_; }

  template <typename F>
  std::vector<double> apply(F&& bare) const {
    std::vector<double> f(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j) f[j] = bare(nodes_[j]);
    std::vector<double> out(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& row = rows_[i];
      double acc = 0.0;
      for (std::size_t k = 0; k < row.kernel.size(); ++k)
        acc += row.kernel[k] * f[row.first + k];
      out[i] = acc;
    }
    return out;
  }

 private:
  struct Row {
    std::size_t first = 0;
    std::vector<double> kernel;
  };
  double sigma_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Row> rows_;
};

double max_panel_for(const EmitterSet& set) {
  double panel = 0.5;
  const double omega = fastest_beat(set);
  if (omega > 0) panel = std::min(panel, 0.25 * 2.0 * std::numbers::pi / omega);
  for (const auto& e : set.emitters) panel = std::min(panel, e.lifetime_ps);
  return panel;
}

void require_grid(std::span<const double> grid, const char* what) {
  try {
    uniform_step(grid);
  } catch (const Error& e) {
    fail(ErrorCode::InvalidInput, std::string(what) + ": " + e.what());
  }
}

}  // namespace

void EmitterSet::validate() const {
  for (const auto& e : emitters) {
    if (!(e.lifetime_ps > 0) || !std::isfinite(e.lifetime_ps))
      fail(ErrorCode::InvalidInput, "emitter " + e.state.label() + ": lifetime must be > 0");
    if (!(e.amplitude >= 0) || !std::isfinite(e.amplitude))
      fail(ErrorCode::InvalidInput, "emitter " + e.state.label() + ": amplitude must be >= 0");
    if (!std::isfinite(e.energy_meV) || !std::isfinite(e.phase))
      fail(ErrorCode::InvalidInput, "emitter " + e.state.label() + ": non-finite energy or phase");
  }
  if (!(cross_visibility >= 0 && cross_visibility <= 1))
    fail(ErrorCode::InvalidInput, "cross_visibility must lie in [0, 1]");
  if (!(pure_dephasing_rate >= 0) || !std::isfinite(pure_dephasing_rate))
    fail(ErrorCode::InvalidInput, "pure_dephasing_rate must be >= 0");
  if (!(shg_prompt_amplitude >= 0) || !std::isfinite(shg_prompt_amplitude))
    fail(ErrorCode::InvalidInput, "shg_prompt_amplitude must be >= 0");
}

InstrumentResponse InstrumentResponse::from_components(double pulse_fwhm_ps,
                                                       double camera_fwhm_ps,
                                                       double energy_fwhm_meV) {
  return {std::hypot(pulse_fwhm_ps, camera_fwhm_ps), energy_fwhm_meV};
}

void InstrumentResponse::validate() const {
  if (!(time_fwhm_ps > 0) || !(energy_fwhm_meV > 0) || !std::isfinite(time_fwhm_ps) ||
      !std::isfinite(energy_fwhm_meV))
    fail(ErrorCode::InvalidInput, "instrument widths must be positive");
}

void FringeGeometry::validate() const {
  if (!(sigma_x > 0) || !(k > 0) || !std::isfinite(x0) || !std::isfinite(phi) ||
      !(amplitude >= 0) || pixels < 2)
    fail(ErrorCode::InvalidInput,
         "fringe geometry needs sigma_x > 0, k > 0, amplitude >= 0 and >= 2 pixels");
}

double channel_weight(const std::optional<Channel>& channel, double energy_meV) {
  return std::exp(log_weight(channel, energy_meV));
}

std::complex<double> field_amplitude(const EmitterSet& set, double t_ps,
                                     const std::optional<Channel>& channel) {
  if (t_ps < 0) return {0.0, 0.0};
  std::complex<double> sum{0.0, 0.0};
  for (const auto& e : set.emitters) {
    const double mag = channel_weight(channel, e.energy_meV) * e.amplitude *
                       std::exp(-t_ps / (2.0 * e.lifetime_ps));
    sum += std::polar(mag, e.phase - e.energy_meV * t_ps / phys::kHbar);
  }
  return sum;
}

double bare_intensity(const EmitterSet& set, double t_ps,
                      const std::optional<Channel>& channel) {
  if (t_ps < 0) return 0.0;
  std::complex<double> coherent{0.0, 0.0};
  double incoherent = 0.0;
  for (const auto& e : set.emitters) {
    const double mag = channel_weight(channel, e.energy_meV) * e.amplitude *
                       std::exp(-t_ps / (2.0 * e.lifetime_ps));
    coherent += std::polar(mag, e.phase - e.energy_meV * t_ps / phys::kHbar);
    incoherent += mag * mag;
  }
  // (1 - v) sum|c|^2 + v |sum c|^2 is the cross-term-scaled intensity written
  // as a convex combination, so it cannot go negative.
  const double v = set.cross_visibility * std::exp(-2.0 * set.pure_dephasing_rate * t_ps);
  return (1.0 - v) * incoherent + v * std::norm(coherent);
}

TimeTrace intensity_trace(const EmitterSet& set, std::span<const double> t_grid,
                          const std::optional<Channel>& channel,
                          const std::optional<InstrumentResponse>& irf) {
  set.validate();
  require_grid(t_grid, "time grid");
  TimeTrace trace;
  trace.t.assign(t_grid.begin(), t_grid.end());
  if (channel) {
    trace.meta.channel_energy_meV = channel->center_meV;
    trace.meta.bandwidth_meV = channel->sigma_meV * kFwhmPerSigma;
  }
  if (!irf) {
    trace.intensity.reserve(t_grid.size());
    for (double t : t_grid) trace.intensity.push_back(bare_intensity(set, t, channel));
    return trace;
  }
  irf->validate();
  const double sigma = irf->time_fwhm_ps / kFwhmPerSigma;
  IrfConvolver conv(t_grid, sigma, max_panel_for(set));
  trace.intensity = conv.apply([&](double s) { return bare_intensity(set, s, channel); });
  const double prompt = set.shg_prompt_amplitude * set.shg_prompt_amplitude;
  if (prompt > 0)
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      trace.intensity[i] += prompt * gaussian_pdf(t_grid[i], sigma);
  return trace;
}

Spectrogram spectrogram(const EmitterSet& set, std::span<const double> t_grid,
                        std::span<const double> e_grid,
                        const InstrumentResponse& irf) {
  set.validate();
  irf.validate();
  require_grid(t_grid, "time grid");
  require_grid(e_grid, "energy grid");
  const double sigma_t = irf.time_fwhm_ps / kFwhmPerSigma;
  const double sigma_e = irf.energy_fwhm_meV / kFwhmPerSigma;
  const double density = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma_e);
  IrfConvolver conv(t_grid, sigma_t, max_panel_for(set));

  Spectrogram out;
  out.t.assign(t_grid.begin(), t_grid.end());
  out.e.assign(e_grid.begin(), e_grid.end());
  out.intensity.assign(t_grid.size(), std::vector<double>(e_grid.size(), 0.0));
  for (std::size_t j = 0; j < e_grid.size(); ++j) {
    const Channel channel{e_grid[j], sigma_e};
    const auto column =
        conv.apply([&](double s) { return bare_intensity(set, s, channel); });
    // The SHG prompt shares the mean spectral profile of the emitters.
    const double prompt = set.shg_prompt_amplitude * set.shg_prompt_amplitude;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      double v = column[i] * density;
      if (prompt > 0) {
        double share = 0.0;
        for (const auto& e : set.emitters) {
          const double d = e.energy_meV - e_grid[j];
          share += std::exp(-0.5 * d * d / (sigma_e * sigma_e)) * density;
        }
        if (!set.emitters.empty()) share /= static_cast<double>(set.emitters.size());
        v += prompt * share * gaussian_pdf(t_grid[i], sigma_t);
      }
      out.intensity[i][j] = v;
    }
  }
  return out;
}

std::complex<double> g1(const EmitterSet& set, double delay_ps,
                        const std::optional<Channel>& channel) {
  if (set.emitters.empty()) fail(ErrorCode::InvalidInput, "g1 of an empty emitter set");
  if (!std::isfinite(delay_ps)) fail(ErrorCode::InvalidInput, "delay must be finite");
  set.validate();
  // Weights are the time-integrated channel intensities w^2 a^2 tau, kept in
  // log form relative to the largest so remote channels still normalize.
  std::vector<double> logw;
  logw.reserve(set.emitters.size());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& e : set.emitters) {
    const double lw = e.amplitude > 0
                          ? 2.0 * log_weight(channel, e.energy_meV) +
                                2.0 * std::log(e.amplitude) + std::log(e.lifetime_ps)
                          : -std::numeric_limits<double>::infinity();
    logw.push_back(lw);
    top = std::max(top, lw);
  }
  if (!std::isfinite(top)) return {0.0, 0.0};
  const double abs_delay = std::abs(delay_ps);
  std::complex<double> num{0.0, 0.0};
  double den = 0.0;
  for (std::size_t k = 0; k < set.emitters.size(); ++k) {
    const auto& e = set.emitters[k];
    const double w = std::exp(logw[k] - top);
    const double decay =
        std::exp(-abs_delay * (0.5 / e.lifetime_ps + set.pure_dephasing_rate));
    num += std::polar(w * decay, -e.energy_meV * delay_ps / phys::kHbar);
    den += w;
  }
  return num / den;
}

FringeImage fringe_image(const EmitterSet& set, double delay_ps,
                         const FringeGeometry& geometry,
                         std::span<const double> e_grid, double channel_fwhm_meV) {
  geometry.validate();
  if (!(channel_fwhm_meV > 0))
    fail(ErrorCode::InvalidInput, "channel_fwhm must be positive");
  if (set.emitters.empty())
    fail(ErrorCode::InvalidInput, "fringe image of an empty emitter set");
  require_grid(e_grid, "energy grid");
  const double sigma_e = channel_fwhm_meV / kFwhmPerSigma;

  double total = 0.0;
  for (const auto& e : set.emitters) total += e.amplitude * e.amplitude * e.lifetime_ps;

  FringeImage img;
  img.delay_ps = delay_ps;
  img.e.assign(e_grid.begin(), e_grid.end());
  img.x.resize(geometry.pixels);
  for (std::size_t i = 0; i < geometry.pixels; ++i) img.x[i] = static_cast<double>(i);
  img.intensity.assign(geometry.pixels, std::vector<double>(e_grid.size(), 0.0));

  for (std::size_t j = 0; j < e_grid.size(); ++j) {
    const Channel channel{e_grid[j], sigma_e};
    double row_weight = 0.0;
    for (const auto& e : set.emitters) {
      const double w = channel_weight(channel, e.energy_meV);
      row_weight += w * w * e.amplitude * e.amplitude * e.lifetime_ps;
    }
    const double amp = total > 0 ? geometry.amplitude * row_weight / total : 0.0;
    const auto g = g1(set, delay_ps, channel);
    const double contrast = std::abs(g);
    const double phase = geometry.phi + std::arg(g);
    for (std::size_t i = 0; i < geometry.pixels; ++i) {
      const double x = img.x[i];
      const double d = (x - geometry.x0) / geometry.sigma_x;
      img.intensity[i][j] = amp * std::exp(-0.5 * d * d) * 0.5 *
                            (contrast * std::cos(geometry.k * x + phase) + 1.0);
    }
  }
  return img;
}

EmitterSet emitters_from_catalog(const StateCatalog& catalog,
                                 std::span<const StateId> states,
                                 const StateId& reference,
                                 std::span<const double> amplitudes) {
  if (states.empty()) fail(ErrorCode::InvalidInput, "no states requested");
  if (!amplitudes.empty() && amplitudes.size() != states.size())
    fail(ErrorCode::InvalidInput, "amplitude count does not match state count");
  const auto& ref = catalog.at(reference);
  const auto& anchor = catalog.at(states.front());
  const double anchor_meV = (anchor.energy_eV - ref.energy_eV) * 1e3;

  EmitterSet set;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& rec = catalog.at(states[i]);
    Emitter e;
    e.state = rec.id;
    e.lifetime_ps = rec.lifetime_ps;
    e.amplitude = amplitudes.empty() ? 1.0 : amplitudes[i];
    if (i == 0) {
      e.energy_meV = anchor_meV;
    } else {
      const double split = energy_split(states.front(), states[i], catalog).split_meV;
      e.energy_meV = anchor_meV + (rec.energy_eV >= anchor.energy_eV ? split : -split);
    }
    set.emitters.push_back(e);
  }
  return set;
}

}  // namespace rydbeat
