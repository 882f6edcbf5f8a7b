#pragma once

// Self-contained reproduction runs: simulate from the catalog, analyze with
// the toolkit and compare against the reference values.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rydbeat/beats.hpp"
#include "rydbeat/dynamics.hpp"
#include "rydbeat/fitting.hpp"
#include "rydbeat/states.hpp"

namespace rydbeat {

struct ReproduceOptions {
  std::uint64_t seed = 2021;
  double peak_counts = 1e5;
  double irf_fwhm_ps = 2.57;
  double t_start_ps = -10.0;
  double t_stop_ps = 120.0;
  double dt_ps = 0.1;
  // Interferometer sweep used for the coherence rows.
  double delay_start_ps = 0.0;
  double delay_stop_ps = 15.0;
  double delay_step_ps = 1.0;
  double fringe_peak_counts = 2e4;
};

struct LifetimeCheck {
  StateId state;
  double reference_ps = 0.0;
  double reference_err_ps = 0.0;
  double tolerance_ps = 0.0;
  double recovered_ps = 0.0;
  double recovered_sigma_ps = 0.0;
  std::string source;  // "measured" or "literature"
  std::vector<std::string> flags;
  bool pass = false;
};

/// Round trip for every yellow S and D state with a lifetime in the catalog.
std::vector<LifetimeCheck> reproduce_lifetimes(const StateCatalog& catalog,
                                               const ReproduceOptions& options = {});

struct BeatPartner {
  StateId state;
  double nu_thz = 0.0;  // beat frequency with the anchor
  double amplitude = 0.3;
  int side = 0;  // +1 above, -1 below the anchor; 0 follows the catalog
};

/// One time-trace row of the beat table: the trace state, its major beat and
/// the partners that produce the listed frequencies.
struct BeatScenario {
  std::string trace;
  StateId anchor;
  double major_thz = 0.0;
  double major_err_thz = 0.0;
  StateId major_partner;
  std::vector<BeatPartner> partners;  // major partner first
};

const std::vector<BeatScenario>& beat_scenarios();

/// Emitters realizing a scenario. Partners sit at anchor +- h nu on the side
/// given by the partner (or by catalog energies, above the anchor when the
/// catalog has no record); lifetimes come from the catalog or, failing that,
/// the anchor.
EmitterSet scenario_emitters(const BeatScenario& scenario, const StateCatalog& catalog);

struct BeatCheck {
  std::string trace;
  double reference_thz = 0.0;
  double reference_err_thz = 0.0;
  std::string reference_pair;
  std::optional<double> recovered_thz;
  double recovered_err_thz = 0.0;
  std::string recovered_pair;
  bool pass = false;
};

std::vector<BeatCheck> reproduce_beats(const StateCatalog& catalog,
                                       const ReproduceOptions& options = {});

struct CoherenceScenario {
  std::string label;
  StateId state;
  double t1_ps = 0.0;
  double pure_dephasing_rate = 0.0;
  double t2_low_ps = 0.0;
  double t2_high_ps = 0.0;
};

const std::vector<CoherenceScenario>& coherence_scenarios();

/// Fringe stack of a single-emitter set over the configured delays, with
/// Poisson noise.
std::vector<FringeImage> scenario_fringe_stack(const CoherenceScenario& scenario,
                                               const ReproduceOptions& options);

struct CoherenceCheck {
  std::string label;
  double t1_ps = 0.0;
  double pure_dephasing_rate = 0.0;
  double expected_t2_ps = 0.0;
  double t2_low_ps = 0.0;
  double t2_high_ps = 0.0;
  double recovered_ps = 0.0;
  double recovered_sigma_ps = 0.0;
  bool bound_ok = false;
  std::vector<std::string> flags;
  std::string error;
  bool pass = false;
};

std::vector<CoherenceCheck> reproduce_coherence(const ReproduceOptions& options = {});

}  // namespace rydbeat
