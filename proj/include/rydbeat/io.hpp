#pragma once

// Locale-independent CSV and text file helpers for the data formats.

#include <string>
#include <string_view>

#include "rydbeat/beats.hpp"
#include "rydbeat/dynamics.hpp"

namespace rydbeat {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// `time_ps,intensity` with one row per sample.
std::string trace_to_csv(const TimeTrace& trace);
TimeTrace trace_from_csv(std::string_view text, const std::string& origin = "<memory>");

/// Header row holds the energy grid (meV) after a corner label; each further
/// row starts with the time (ps).
std::string spectrogram_to_csv(const Spectrogram& s);
Spectrogram spectrogram_from_csv(std::string_view text, const std::string& origin = "<memory>");

/// Same layout as the spectrogram with the pixel index in the first column.
/// The delay is not part of the file.
std::string fringe_image_to_csv(const FringeImage& img);
FringeImage fringe_image_from_csv(std::string_view text, const std::string& origin = "<memory>");

/// `freq_thz,power`.
std::string spectrum_to_csv(const BeatSpectrum& spectrum);

TimeTrace load_trace(const std::string& path);
FringeImage load_fringe_image(const std::string& path);

}  // namespace rydbeat
