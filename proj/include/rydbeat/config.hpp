#pragma once

// Run configuration for the command layer. Every field has a default; a
// config file only needs to name what it changes.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rydbeat/beats.hpp"
#include "rydbeat/dynamics.hpp"
#include "rydbeat/fitting.hpp"
#include "rydbeat/states.hpp"

namespace rydbeat {

inline constexpr std::uint64_t kDefaultSeed = 2021;

struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  std::vector<double> values() const;
};

/// A state to simulate. Energy and lifetime come from the catalog unless
/// given here; states the catalog does not know need both.
struct EmitterSpec {
  StateId state;
  std::optional<double> energy_meV;
  std::optional<double> lifetime_ps;
  double amplitude = 1.0;
  double phase = 0.0;
};

enum class NoiseKind { None, Poisson, Gaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Poisson;
  double peak_counts = 1e5;
  double sigma = 1.0;
};

struct ChannelSpec {
  double center_meV = 0.0;
  double fwhm_meV = 0.6;
};

struct AnalysisSpec {
  // lifetime fits
  std::optional<double> irf_fwhm_ps = 2.57;
  bool fix_irf = false;
  bool fit_prompt = false;
  Weighting weighting = Weighting::Unit;
  // beats
  DetrendMethod detrend = DetrendMethod::EmgResidual;
  double moving_mean_width_ps = 10.0;
  Window window = Window::Hann;
  int pad_factor = 8;
  double min_prominence = 0.1;
  double false_alarm = 0.01;
  double tolerance_meV = 0.12;
  double start_after_peak_ps = 2.57;
  std::vector<StateId> anchors;
  bool include_neighbor_n = true;
  // fringes and coherence
  std::optional<double> channel_center_meV;
  double channel_half_width_meV = 0.15;
  DecayShape decay_shape = DecayShape::Exponential;
  std::optional<double> t1_ps;
};

struct RunConfig {
  std::string catalog = "embedded";
  std::uint64_t seed = kDefaultSeed;
  std::vector<EmitterSpec> emitters{
      EmitterSpec{StateId::parse("3S"), std::nullopt, std::nullopt, 1.0, 0.0}};
  std::optional<StateId> reference;  // first emitter when absent
  double cross_visibility = 1.0;
  double pure_dephasing_rate = 0.0;
  double shg_prompt_amplitude = 0.0;
  InstrumentResponse instrument;
  GridSpec time{0.0, 120.0, 0.1};
  GridSpec energy{-1.5, 1.5, 0.05};
  std::optional<ChannelSpec> channel;  // spectrally unresolved when absent
  NoiseSpec noise;
  GridSpec delays{0.0, 30.0, 1.0};
  FringeGeometry geometry;
  double fringe_channel_fwhm_meV = 0.6;
  AnalysisSpec analysis;
};

/// Parses a config document. Unknown keys and bad values raise Config errors
/// that name the offending field.
RunConfig config_from_json(std::string_view text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);
/// The fully resolved config, defaults included. Reading it back yields an
/// identical config.
std::string config_to_json(const RunConfig& config);

/// The catalog named by the config. "embedded" is replaced by the file in
/// RYDBEAT_CATALOG when that variable is set. Returns the path actually used
/// through `resolved` when given.
StateCatalog resolve_catalog(const RunConfig& config, std::string* resolved = nullptr);

EmitterSet build_emitters(const RunConfig& config, const StateCatalog& catalog);

std::optional<Channel> build_channel(const RunConfig& config);
BeatReportOptions build_beat_options(const RunConfig& config);
LifetimeFitOptions build_lifetime_options(const RunConfig& config);

}  // namespace rydbeat
