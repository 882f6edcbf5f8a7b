#include "rydbeat/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "rydbeat/error.hpp"

namespace rydbeat {

std::string format_number(double value) {
  if (!std::isfinite(value)) fail(ErrorCode::InvalidInput, "cannot write a non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "error reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "': " + std::strerror(errno));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) fail(ErrorCode::Io, "error writing '" + path + "'");
}

namespace {

struct CsvTable {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
};

CsvTable split_csv(std::string_view text) {
  CsvTable table;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      cells.push_back(row.substr(start, comma == std::string_view::npos ? row.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    table.rows.push_back(std::move(cells));
    table.lines.push_back(line);
  }
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line, std::size_t col,
                             const std::string& msg) {
  fail(ErrorCode::Parse,
       origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

double parse_cell(std::string_view cell, const std::string& origin, std::size_t line,
                  std::size_t col) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    parse_fail(origin, line, col, "expected a number, got '" + std::string(cell) + "'");
  if (!std::isfinite(v)) parse_fail(origin, line, col, "non-finite value");
  return v;
}

struct Grid2D {
  std::vector<double> first_col;
  std::vector<double> header;
  std::vector<std::vector<double>> values;
};

Grid2D parse_grid(std::string_view text, const std::string& origin) {
  const auto table = split_csv(text);
  if (table.rows.size() < 2) fail(ErrorCode::Parse, origin + ": expected a header row and data rows");
  Grid2D g;
  const auto& head = table.rows.front();
  if (head.size() < 2) parse_fail(origin, table.lines[0], 2, "header holds no energy grid");
  for (std::size_t c = 1; c < head.size(); ++c)
    g.header.push_back(parse_cell(head[c], origin, table.lines[0], c + 1));
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != head.size())
      parse_fail(origin, table.lines[r], std::min(row.size(), head.size()) + 1,
                 "expected " + std::to_string(head.size()) + " columns, found " +
                     std::to_string(row.size()));
    g.first_col.push_back(parse_cell(row[0], origin, table.lines[r], 1));
    std::vector<double> vals(row.size() - 1);
    for (std::size_t c = 1; c < row.size(); ++c)
      vals[c - 1] = parse_cell(row[c], origin, table.lines[r], c + 1);
    g.values.push_back(std::move(vals));
  }
  return g;
}

std::string grid_to_csv(const char* corner, const std::vector<double>& first_col,
                        const std::vector<double>& header,
                        const std::vector<std::vector<double>>& values) {
  std::string out = corner;
  for (double e : header) out += "," + format_number(e);
  out += '\n';
  for (std::size_t i = 0; i < first_col.size(); ++i) {
    out += format_number(first_col[i]);
    for (double v : values[i]) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string trace_to_csv(const TimeTrace& trace) {
  if (trace.t.size() != trace.intensity.size())
    fail(ErrorCode::InvalidInput, "trace time/intensity size mismatch");
  std::string out = "time_ps,intensity\n";
  for (std::size_t i = 0; i < trace.t.size(); ++i)
    out += format_number(trace.t[i]) + "," + format_number(trace.intensity[i]) + "\n";
  return out;
}

TimeTrace trace_from_csv(std::string_view text, const std::string& origin) {
  const auto table = split_csv(text);
  if (table.rows.empty()) fail(ErrorCode::Parse, origin + ": empty file");
  std::size_t first = 0;
  const auto& head = table.rows.front();
  if (head.size() == 2 && trim(head[0]) == "time_ps") first = 1;
  TimeTrace trace;
  for (std::size_t r = first; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 2)
      parse_fail(origin, table.lines[r], std::min<std::size_t>(row.size(), 2) + 1,
                 "expected 2 columns, found " + std::to_string(row.size()));
    trace.t.push_back(parse_cell(row[0], origin, table.lines[r], 1));
    trace.intensity.push_back(parse_cell(row[1], origin, table.lines[r], 2));
  }
  if (trace.t.empty()) fail(ErrorCode::Parse, origin + ": no data rows");
  return trace;
}

std::string spectrogram_to_csv(const Spectrogram& s) {
  return grid_to_csv("time_ps/energy_meV", s.t, s.e, s.intensity);
}

Spectrogram spectrogram_from_csv(std::string_view text, const std::string& origin) {
  auto g = parse_grid(text, origin);
  return {std::move(g.first_col), std::move(g.header), std::move(g.values)};
}

std::string fringe_image_to_csv(const FringeImage& img) {
  return grid_to_csv("pixel/energy_meV", img.x, img.e, img.intensity);
}

FringeImage fringe_image_from_csv(std::string_view text, const std::string& origin) {
  auto g = parse_grid(text, origin);
  FringeImage img;
  img.x = std::move(g.first_col);
  img.e = std::move(g.header);
  img.intensity = std::move(g.values);
  return img;
}

std::string spectrum_to_csv(const BeatSpectrum& spectrum) {
  std::string out = "freq_thz,power\n";
  for (std::size_t i = 0; i < spectrum.freq_thz.size(); ++i)
    out += format_number(spectrum.freq_thz[i]) + "," + format_number(spectrum.power[i]) + "\n";
  return out;
}

TimeTrace load_trace(const std::string& path) { return trace_from_csv(read_text_file(path), path); }

FringeImage load_fringe_image(const std::string& path) {
  return fringe_image_from_csv(read_text_file(path), path);
}

}  // namespace rydbeat
