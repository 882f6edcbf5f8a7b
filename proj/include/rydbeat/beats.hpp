#pragma once

// Quantum-beat analysis: detrending, power spectrum, peak picking and
// assignment of peaks to state-pair energy splits.

#include <optional>
#include <string>
#include <vector>

#include "rydbeat/dynamics.hpp"
#include "rydbeat/fitting.hpp"
#include "rydbeat/states.hpp"

namespace rydbeat {

enum class Window { Hann, Rect };
const char* to_string(Window w) noexcept;
Window parse_window(std::string_view text);

struct BeatSpectrum {
  std::vector<double> freq_thz;
  std::vector<double> power;
  Window window = Window::Hann;
  int pad_factor = 1;
  double native_resolution_thz = 0.0;
};

enum class PeakRank { Major, Minor };

struct BeatPeak {
  double nu_thz = 0.0;
  double nu_err_thz = 0.0;
  double energy_meV = 0.0;
  double energy_err_meV = 0.0;
  double amplitude = 0.0;  // power relative to the strongest peak
  PeakRank rank = PeakRank::Minor;
};

struct BeatCandidate {
  StateId a;
  StateId b;
  double split_meV = 0.0;
  bool overridden = false;
  double mismatch_meV = 0.0;

  std::string label() const;  // "4S-4D2"
};

struct BeatAssignment {
  BeatPeak peak;
  std::vector<BeatCandidate> candidates;  // ascending mismatch
};

enum class DetrendMethod { EmgResidual, MovingMean };

struct DetrendOptions {
  DetrendMethod method = DetrendMethod::EmgResidual;
  double moving_mean_width_ps = 10.0;
  LifetimeFitOptions fit;
};

struct DetrendResult {
  TimeTrace residual;
  std::optional<FitResult> fit;  // set for EmgResidual
  std::vector<std::string> flags;
};

/// Trace minus its smooth component. A failed EMG fit is rethrown as a
/// DegenerateFit error naming the detrend stage. The moving mean raises the
/// "moving_mean_too_narrow" flag when its width is below three periods of the
/// dominant oscillation left in the residual.
DetrendResult detrend(const TimeTrace& trace, const DetrendOptions& options = {});

/// One-sided power spectrum of the windowed, zero-padded trace, normalized
/// so that the bins sum to the windowed signal energy.
BeatSpectrum power_spectrum(const TimeTrace& trace, Window window = Window::Hann,
                            int pad_factor = 4);

struct PeakOptions {
  double min_prominence = 0.1;  // fraction of the largest peak
  double false_alarm = 0.01;    // per-spectrum probability of a noise peak
};

/// Local maxima outside the zero-frequency lobe (below 1.5 native bins) that
/// are prominent relative to the largest one and stand above the estimated
/// noise floor. Sorted by power; the first is the major peak.
std::vector<BeatPeak> find_peaks(const BeatSpectrum& spectrum, const PeakOptions& options = {});

struct AssignOptions {
  /// Pairs must contain one of these states. A D anchor without sublevel
  /// matches every sublevel of that n. Empty means no restriction.
  std::vector<StateId> anchors;
  bool include_neighbor_n = true;
};

/// Candidate pairs are same-n S/D/F pairs plus (n, n+-1) S/D pairs among the
/// yellow-series states the catalog knows.
std::vector<BeatAssignment> assign_peaks(const std::vector<BeatPeak>& peaks,
                                         const StateCatalog& catalog, double tolerance_meV,
                                         const AssignOptions& options = {});

struct BeatReportOptions {
  DetrendOptions detrend;
  Window window = Window::Hann;
  int pad_factor = 8;
  PeakOptions peaks;
  double tolerance_meV = 0.12;
  AssignOptions assign;
  /// Analysis starts this long after the trace maximum (default one IRF FWHM).
  double start_after_peak_ps = 2.57;
  std::optional<double> window_end_ps;
};

struct BeatReport {
  std::vector<BeatAssignment> rows;
  BeatSpectrum spectrum;
  std::optional<FitResult> lifetime_fit;
  double window_start_ps = 0.0;
  double window_end_ps = 0.0;
  std::vector<std::string> flags;
};

BeatReport beat_report(const TimeTrace& trace, const StateCatalog& catalog,
                       const BeatReportOptions& options = {});

std::string beat_report_json(const BeatReport& report, int indent = 2);
std::string beat_report_text(const BeatReport& report);

}  // namespace rydbeat
