#pragma once

// Command layer behind the CLI: each command reads its inputs, runs one
// pipeline and writes its outputs into a directory.

#include <string>
#include <string_view>
#include <vector>

#include "rydbeat/config.hpp"
#include "rydbeat/reproduce.hpp"

namespace rydbeat {

const char* toolkit_version() noexcept;

enum class SimulateKind { Trace, Spectrogram, Fringes };
enum class FitKind { Lifetime, Fringe, Coherence };
enum class ReproduceScope { Lifetimes, Beats, Coherence, All };

SimulateKind parse_simulate_kind(std::string_view text);
FitKind parse_fit_kind(std::string_view text);
ReproduceScope parse_reproduce_scope(std::string_view text);

struct CommandResult {
  std::vector<std::string> files;  // written, in order
  std::string summary;             // short human-readable outcome
  bool ok = true;                  // false on a failed fit or criterion
};

/// Writes the simulated data plus `<kind>.config.json` echoing the resolved
/// config. Fringe sweeps write one image per delay and a `fringes.json`
/// manifest listing delays, files and the simulated emitters.
CommandResult cmd_simulate(SimulateKind kind, const RunConfig& config, const std::string& out_dir);

/// Lifetime and fringe fits read one CSV; coherence reads a fringe manifest.
/// A fit that fails is reported in the output JSON with ok = false.
CommandResult cmd_fit(FitKind kind, const std::string& input, const RunConfig& config,
                      const std::string& out_dir);

/// Writes spectrum.csv, beats.json and beats.txt.
CommandResult cmd_beats(const std::string& input, const RunConfig& config,
                        const std::string& out_dir);

struct CriterionResult {
  std::string id;
  std::string description;
  bool pass = false;
  std::string detail;
};

struct ReproductionReport {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scope;
  std::vector<LifetimeCheck> lifetimes;
  std::vector<BeatCheck> beats;
  std::vector<CoherenceCheck> coherence;
  std::vector<CriterionResult> criteria;
  bool all_pass = false;
};

ReproductionReport reproduce(ReproduceScope scope, const RunConfig& config);
std::string report_to_json(const ReproductionReport& report);
std::string report_to_text(const ReproductionReport& report);

/// Writes reproduce.json and reproduce.txt; ok is false when any criterion
/// fails.
CommandResult cmd_reproduce(ReproduceScope scope, const RunConfig& config,
                            const std::string& out_dir);

}  // namespace rydbeat
