#pragma once

// Interferometer pipeline: a stack of fringe images taken at several delays is
// reduced to contrast-versus-delay curves per energy channel, each of which
// is fitted for its coherence time.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rydbeat/dynamics.hpp"
#include "rydbeat/fitting.hpp"

namespace rydbeat {

struct CoherenceOptions {
  /// Analyze a single channel at this energy. When absent, channels are
  /// placed on the local maxima of the time-integrated spectrum.
  std::optional<double> channel_center_meV;
  double channel_half_width_meV = 0.15;
  /// Columns below this fraction of the brightest column are not fitted.
  double min_relative_intensity = 0.05;
  DecayShape shape = DecayShape::Exponential;
};

struct ChannelCoherence {
  double center_meV = 0.0;
  std::size_t columns = 0;
  std::vector<ContrastPoint> points;
  std::optional<FitResult> decay;
  std::string error;  // set when the decay fit failed
};

struct CoherenceResult {
  std::vector<ChannelCoherence> channels;
};

/// Fits every energy column of every image, combines the column contrasts of
/// each channel by inverse variance and fits the contrast decay.
CoherenceResult analyze_fringe_stack(std::span<const FringeImage> stack,
                                     const CoherenceOptions& options = {});

}  // namespace rydbeat
