#pragma once

// Forward model of the emission from a coherent superposition of exciton
// states: time traces, time-energy spectrograms and interferometer fringes.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rydbeat/states.hpp"

namespace rydbeat {

/// FWHM of a Gaussian divided by this gives its standard deviation.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

struct Emitter {
  StateId state;
  double energy_meV = 0.0;  // relative to an arbitrary reference
  double lifetime_ps = 1.0;
  double amplitude = 1.0;
  double phase = 0.0;
};

struct EmitterSet {
  std::vector<Emitter> emitters;
  double cross_visibility = 1.0;     // beta in [0, 1]
  double pure_dephasing_rate = 0.0;  // gamma_phi, 1/ps
  double shg_prompt_amplitude = 0.0;

  void validate() const;
};

/// Spectral detection window. Absent means spectrally unresolved detection.
struct Channel {
  double center_meV = 0.0;
  double sigma_meV = 1.0;
};

struct InstrumentResponse {
  double time_fwhm_ps = 2.57;
  double energy_fwhm_meV = 0.6;

  /// Pulse and camera widths combined in quadrature.
  static InstrumentResponse from_components(double pulse_fwhm_ps,
                                            double camera_fwhm_ps,
                                            double energy_fwhm_meV);
  void validate() const;
};

struct TraceMeta {
  std::optional<double> channel_energy_meV;
  std::optional<double> bandwidth_meV;
  std::optional<std::uint64_t> seed;
};

struct TimeTrace {
  std::vector<double> t;
  std::vector<double> intensity;
  TraceMeta meta;
};

/// intensity[i][j] is time t[i], energy e[j]; values are per meV.
struct Spectrogram {
  std::vector<double> t;
  std::vector<double> e;
  std::vector<std::vector<double>> intensity;
};

/// intensity[i][j] is pixel x[i], energy e[j].
struct FringeImage {
  std::vector<double> x;
  std::vector<double> e;
  std::vector<std::vector<double>> intensity;
  double delay_ps = 0.0;
};

struct FringeGeometry {
  double x0 = 200.0;
  double sigma_x = 80.0;
  double k = 0.5;  // rad / pixel
  double phi = 0.0;
  double amplitude = 1000.0;
  std::size_t pixels = 400;

  void validate() const;
};

/// Amplitude-level spectral weight of an emitter at energy `energy_meV`.
double channel_weight(const std::optional<Channel>& channel, double energy_meV);

std::complex<double> field_amplitude(const EmitterSet& set, double t_ps,
                                     const std::optional<Channel>& channel);

/// Detected intensity before the instrument response (SHG prompt excluded).
double bare_intensity(const EmitterSet& set, double t_ps,
                      const std::optional<Channel>& channel);

/// Intensity on `t_grid`; with an instrument response the bare intensity is
/// convolved with the Gaussian IRF and the SHG prompt is added as an IRF
/// replica at t = 0.
TimeTrace intensity_trace(const EmitterSet& set, std::span<const double> t_grid,
                          const std::optional<Channel>& channel,
                          const std::optional<InstrumentResponse>& irf);

Spectrogram spectrogram(const EmitterSet& set, std::span<const double> t_grid,
                        std::span<const double> e_grid,
                        const InstrumentResponse& irf);

/// Normalized first-order field autocorrelation at interferometer delay.
std::complex<double> g1(const EmitterSet& set, double delay_ps,
                        const std::optional<Channel>& channel);

FringeImage fringe_image(const EmitterSet& set, double delay_ps,
                         const FringeGeometry& geometry,
                         std::span<const double> e_grid,
                         double channel_fwhm_meV);

/// Emitters for `states` using catalog lifetimes. The first state sits at its
/// catalog energy relative to `reference`; every other state is placed at the
/// quoted split from it (override when present), on the side given by the
/// catalog energies. Amplitudes default to 1.
EmitterSet emitters_from_catalog(const StateCatalog& catalog,
                                 std::span<const StateId> states,
                                 const StateId& reference,
                                 std::span<const double> amplitudes = {});

}  // namespace rydbeat
