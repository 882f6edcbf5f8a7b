#include "rydbeat/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "rydbeat/coherence.hpp"
#include "rydbeat/error.hpp"
#include "rydbeat/io.hpp"
#include "rydbeat/noise.hpp"

#ifndef RYDBEAT_VERSION
#define RYDBEAT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace rydbeat {

using json = nlohmann::ordered_json;

const char* toolkit_version() noexcept { return RYDBEAT_VERSION; }

SimulateKind parse_simulate_kind(std::string_view text) {
  if (text == "trace") return SimulateKind::Trace;
  if (text == "spectrogram") return SimulateKind::Spectrogram;
  if (text == "fringes") return SimulateKind::Fringes;
  fail(ErrorCode::InvalidInput,
       "unknown simulation kind '" + std::string(text) + "' (trace, spectrogram, fringes)");
}

FitKind parse_fit_kind(std::string_view text) {
  if (text == "lifetime") return FitKind::Lifetime;
  if (text == "fringe") return FitKind::Fringe;
  if (text == "coherence") return FitKind::Coherence;
  fail(ErrorCode::InvalidInput,
       "unknown fit kind '" + std::string(text) + "' (lifetime, fringe, coherence)");
}

ReproduceScope parse_reproduce_scope(std::string_view text) {
  if (text == "lifetimes") return ReproduceScope::Lifetimes;
  if (text == "beats") return ReproduceScope::Beats;
  if (text == "coherence") return ReproduceScope::Coherence;
  if (text == "all") return ReproduceScope::All;
  fail(ErrorCode::InvalidInput,
       "unknown scope '" + std::string(text) + "' (lifetimes, beats, coherence, all)");
}

namespace {

std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<double> apply_noise(std::span<const double> signal, const NoiseSpec& noise,
                                std::uint64_t seed) {
  switch (noise.kind) {
    case NoiseKind::None: return {signal.begin(), signal.end()};
    case NoiseKind::Poisson: return add_noise(signal, PoissonNoise{noise.peak_counts}, seed);
    case NoiseKind::Gaussian: return add_noise(signal, GaussianNoise{noise.sigma}, seed);
  }
  return {signal.begin(), signal.end()};
}

// Noise on a [row][energy] array, one independent stream per energy column
// so columns can be generated in any order. Poisson counts are scaled to the
// maximum of the whole array.
void column_noise(std::vector<std::vector<double>>& m, const NoiseSpec& noise,
                  std::uint64_t seed) {
  if (m.empty() || noise.kind == NoiseKind::None) return;
  double peak = 0.0;
  for (const auto& row : m)
    for (double v : row) peak = std::max(peak, v);
  std::vector<double> col(m.size());
  for (std::size_t j = 0; j < m.front().size(); ++j) {
    for (std::size_t i = 0; i < m.size(); ++i) col[i] = m[i][j];
    std::vector<double> out;
    if (noise.kind == NoiseKind::Poisson) {
      if (!(peak > 0)) return;
      // Counts scale fixed by the global peak, not the column maximum.
      const double scale = noise.peak_counts / peak;
      std::vector<double> counts(col.size());
      for (std::size_t i = 0; i < col.size(); ++i) counts[i] = col[i] * scale;
      const double col_peak = *std::max_element(counts.begin(), counts.end());
      if (!(col_peak > 0)) continue;
      out = add_noise(counts, PoissonNoise{col_peak}, derive_seed(seed, j));
      for (auto& v : out) v /= scale;
    } else {
      out = add_noise(col, GaussianNoise{noise.sigma}, derive_seed(seed, j));
    }
    for (std::size_t i = 0; i < m.size(); ++i) m[i][j] = out[i];
  }
}

// Stream numbers for derive_seed, one per simulated product.
constexpr std::uint64_t kTraceStream = 1;
constexpr std::uint64_t kSpectrogramStream = 2;
constexpr std::uint64_t kFringeStream = 1000;

json emitters_json(const EmitterSet& set) {
  auto arr = json::array();
  for (const auto& e : set.emitters)
    arr.push_back({{"state", e.state.label()},
                   {"energy_meV", e.energy_meV},
                   {"lifetime_ps", e.lifetime_ps},
                   {"amplitude", e.amplitude}});
  return arr;
}

bool is_fit_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateFit:
    case ErrorCode::InsufficientCoverage:
    case ErrorCode::InsufficientDecay:
    case ErrorCode::InsufficientData:
      return true;
    default:
      return false;
  }
}

json failed_fit_json(const char* model, const Error& e) {
  return {{"model", model},
          {"params", json::object()},
          {"sigmas", json::object()},
          {"chi2_reduced", nullptr},
          {"converged", false},
          {"flags", json::array({"fit_failed"})},
          {"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

CommandResult cmd_simulate(SimulateKind kind, const RunConfig& config, const std::string& out_dir) {
  prepare_dir(out_dir);
  std::string catalog_path;
  const auto catalog = resolve_catalog(config, &catalog_path);
  RunConfig resolved = config;
  resolved.catalog = catalog_path;
  const auto set = build_emitters(config, catalog);

  CommandResult result;
  std::string stem;
  switch (kind) {
    case SimulateKind::Trace: {
      stem = "trace";
      const auto t = config.time.values();
      auto trace = intensity_trace(set, t, build_channel(config), config.instrument);
      trace.intensity = apply_noise(trace.intensity, config.noise, derive_seed(config.seed, kTraceStream));
      const auto path = join(out_dir, "trace.csv");
      write_text_file(path, trace_to_csv(trace));
      result.files.push_back(path);
      result.summary = "trace: " + std::to_string(t.size()) + " samples";
      break;
    }
    case SimulateKind::Spectrogram: {
      stem = "spectrogram";
      const auto t = config.time.values();
      const auto e = config.energy.values();
      auto s = spectrogram(set, t, e, config.instrument);
      column_noise(s.intensity, config.noise, derive_seed(config.seed, kSpectrogramStream));
      const auto path = join(out_dir, "spectrogram.csv");
      write_text_file(path, spectrogram_to_csv(s));
      result.files.push_back(path);
      result.summary = "spectrogram: " + std::to_string(t.size()) + " x " +
                       std::to_string(e.size());
      break;
    }
    case SimulateKind::Fringes: {
      stem = "fringes";
      const auto delays = config.delays.values();
      const auto e = config.energy.values();
      json manifest;
      manifest["delays_ps"] = delays;
      auto files = json::array();
      for (std::size_t d = 0; d < delays.size(); ++d) {
        auto img = fringe_image(set, delays[d], config.geometry, e, config.fringe_channel_fwhm_meV);
        column_noise(img.intensity, config.noise, derive_seed(config.seed, kFringeStream + d));
        char name[32];
        std::snprintf(name, sizeof name, "fringe_%03zu.csv", d);
        const auto path = join(out_dir, name);
        write_text_file(path, fringe_image_to_csv(img));
        result.files.push_back(path);
        files.push_back(name);
      }
      manifest["files"] = files;
      manifest["channel_fwhm_meV"] = config.fringe_channel_fwhm_meV;
      manifest["emitters"] = emitters_json(set);
      manifest["config"] = "fringes.config.json";
      const auto mpath = join(out_dir, "fringes.json");
      write_text_file(mpath, manifest.dump(2) + "\n");
      result.files.push_back(mpath);
      result.summary = "fringes: " + std::to_string(delays.size()) + " images";
      break;
    }
  }
  const auto sidecar = join(out_dir, stem + ".config.json");
  write_text_file(sidecar, config_to_json(resolved));
  result.files.push_back(sidecar);
  return result;
}

namespace {

CommandResult fit_lifetime_cmd(const std::string& input, const RunConfig& config,
                               const std::string& out_dir) {
  const auto trace = load_trace(input);
  CommandResult result;
  json out;
  try {
    const auto fit = fit_lifetime(trace, build_lifetime_options(config));
    out = json::parse(fit_result_to_json(fit));
    result.ok = fit.converged;
    result.summary = "tau = " + fmt("%.4g", fit.value("tau")) + " +- " +
                     fmt("%.2g", fit.sigma("tau")) + " ps";
  } catch (const Error& e) {
    if (!is_fit_failure(e.code())) throw;
    out = failed_fit_json("emg", e);
    result.ok = false;
    result.summary = std::string("lifetime fit failed: ") + e.what();
  }
  const auto path = join(out_dir, "lifetime_fit.json");
  write_text_file(path, out.dump(2) + "\n");
  result.files.push_back(path);
  return result;
}

std::size_t brightest_column(const FringeImage& img) {
  std::size_t best = 0;
  double best_sum = -1.0;
  for (std::size_t j = 0; j < img.e.size(); ++j) {
    double s = 0.0;
    for (const auto& row : img.intensity) s += row[j];
    if (s > best_sum) {
      best_sum = s;
      best = j;
    }
  }
  return best;
}

CommandResult fit_fringe_cmd(const std::string& input, const RunConfig& config,
                             const std::string& out_dir) {
  const auto img = load_fringe_image(input);
  std::size_t col = brightest_column(img);
  if (config.analysis.channel_center_meV) {
    const double c = *config.analysis.channel_center_meV;
    for (std::size_t j = 0; j < img.e.size(); ++j)
      if (std::abs(img.e[j] - c) < std::abs(img.e[col] - c)) col = j;
  }
  std::vector<double> row(img.x.size());
  for (std::size_t i = 0; i < img.x.size(); ++i) row[i] = img.intensity[i][col];

  CommandResult result;
  json out;
  try {
    const auto fit = fit_fringe_slice(img.x, row);
    out = json::parse(fit_result_to_json(fit));
    result.ok = fit.converged;
    result.summary = "contrast = " + fmt("%.4f", fit.value("C")) + " +- " +
                     fmt("%.2g", fit.sigma("C")) + " at " + fmt("%.3f", img.e[col]) + " meV";
  } catch (const Error& e) {
    if (!is_fit_failure(e.code())) throw;
    out = failed_fit_json("fringe", e);
    result.ok = false;
    result.summary = std::string("fringe fit failed: ") + e.what();
  }
  out["energy_meV"] = img.e[col];
  const auto path = join(out_dir, "fringe_fit.json");
  write_text_file(path, out.dump(2) + "\n");
  result.files.push_back(path);
  return result;
}

struct ManifestEmitter {
  StateId state;
  double energy_meV;
  double lifetime_ps;
};

CommandResult fit_coherence_cmd(const std::string& input, const RunConfig& config,
                                const std::string& out_dir) {
  const auto text = read_text_file(input);
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, input + ": " + e.what());
  }
  const auto base = fs::path(input).parent_path();
  std::vector<FringeImage> stack;
  std::vector<ManifestEmitter> emitters;
  try {
    const auto& delays = manifest.at("delays_ps");
    const auto& files = manifest.at("files");
    if (!delays.is_array() || !files.is_array() || delays.size() != files.size())
      fail(ErrorCode::Parse, input + ": delays_ps and files must be arrays of equal length");
    for (std::size_t i = 0; i < files.size(); ++i) {
      auto img = load_fringe_image((base / files[i].get<std::string>()).string());
      img.delay_ps = delays[i].get<double>();
      stack.push_back(std::move(img));
    }
    if (manifest.contains("emitters"))
      for (const auto& e : manifest["emitters"])
        emitters.push_back({StateId::parse(e.at("state").get<std::string>()),
                            e.at("energy_meV").get<double>(), e.at("lifetime_ps").get<double>()});
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, input + ": " + e.what());
  }

  CoherenceOptions co;
  co.channel_center_meV = config.analysis.channel_center_meV;
  co.channel_half_width_meV = config.analysis.channel_half_width_meV;
  co.shape = config.analysis.decay_shape;
  const auto res = analyze_fringe_stack(stack, co);

  std::string catalog_path;
  const auto catalog = resolve_catalog(config, &catalog_path);

  CommandResult result;
  json out;
  auto channels = json::array();
  std::ostringstream summary;
  for (const auto& ch : res.channels) {
    json c;
    c["center_meV"] = ch.center_meV;
    c["columns"] = ch.columns;
    auto pts = json::array();
    for (const auto& p : ch.points)
      pts.push_back({{"delay_ps", p.delay_ps}, {"contrast", p.contrast}, {"sigma", p.sigma}});
    c["points"] = pts;
    if (!ch.decay) {
      c["fit"] = nullptr;
      c["error"] = ch.error;
      result.ok = false;
      summary << "channel " << fmt("%.3f", ch.center_meV) << " meV: decay fit failed\n";
      channels.push_back(c);
      continue;
    }
    c["fit"] = json::parse(fit_result_to_json(*ch.decay));
    if (!ch.decay->converged) result.ok = false;

    std::optional<double> t1;
    double t1_sigma = 0.0;
    std::string t1_source;
    if (config.analysis.t1_ps) {
      t1 = config.analysis.t1_ps;
      t1_source = "config";
    } else if (!emitters.empty()) {
      const ManifestEmitter* best = &emitters.front();
      for (const auto& e : emitters)
        if (std::abs(e.energy_meV - ch.center_meV) < std::abs(best->energy_meV - ch.center_meV))
          best = &e;
      t1 = best->lifetime_ps;
      t1_source = "manifest:" + best->state.label();
      if (const auto* rec = catalog.find(best->state); rec && rec->lifetime_ps == best->lifetime_ps)
        t1_sigma = rec->lifetime_err_ps;
    }
    summary << "channel " << fmt("%.3f", ch.center_meV) << " meV: T2 = "
            << fmt("%.4g", ch.decay->value("T2")) << " +- " << fmt("%.2g", ch.decay->sigma("T2"))
            << " ps";
    if (t1) {
      const auto b = validate_t2_bound(*ch.decay, *t1, t1_sigma);
      c["t2_bound"] = {{"t1_ps", b.t1_ps},
                       {"t1_sigma_ps", b.t1_sigma_ps},
                       {"t1_source", t1_source},
                       {"bound_ps", b.bound_ps},
                       {"violation", b.violation},
                       {"pure_dephasing_rate", b.pure_dephasing_rate}};
      summary << ", 2 T1 = " << fmt("%.4g", b.bound_ps) << " ps, bound "
              << (b.violation ? "VIOLATED" : "ok");
      if (b.violation) result.ok = false;
    } else {
      c["t2_bound"] = nullptr;
    }
    summary << "\n";
    channels.push_back(c);
  }
  out["channels"] = channels;
  const auto path = join(out_dir, "coherence.json");
  write_text_file(path, out.dump(2) + "\n");
  result.files.push_back(path);
  result.summary = summary.str();
  if (!result.summary.empty() && result.summary.back() == '\n') result.summary.pop_back();
  if (res.channels.empty()) {
    result.ok = false;
    result.summary = "no channel above the intensity floor";
  }
  return result;
}

}  // namespace

CommandResult cmd_fit(FitKind kind, const std::string& input, const RunConfig& config,
                      const std::string& out_dir) {
  prepare_dir(out_dir);
  switch (kind) {
    case FitKind::Lifetime: return fit_lifetime_cmd(input, config, out_dir);
    case FitKind::Fringe: return fit_fringe_cmd(input, config, out_dir);
    case FitKind::Coherence: return fit_coherence_cmd(input, config, out_dir);
  }
  return {};
}

CommandResult cmd_beats(const std::string& input, const RunConfig& config,
                        const std::string& out_dir) {
  const auto trace = load_trace(input);
  const auto catalog = resolve_catalog(config);
  const auto report = beat_report(trace, catalog, build_beat_options(config));
  prepare_dir(out_dir);
  CommandResult result;
  const auto spath = join(out_dir, "spectrum.csv");
  write_text_file(spath, spectrum_to_csv(report.spectrum));
  const auto jpath = join(out_dir, "beats.json");
  write_text_file(jpath, beat_report_json(report) + "\n");
  const auto tpath = join(out_dir, "beats.txt");
  const auto text = beat_report_text(report);
  write_text_file(tpath, text);
  result.files = {spath, jpath, tpath};
  result.summary = text;
  if (!result.summary.empty() && result.summary.back() == '\n') result.summary.pop_back();
  return result;
}

namespace {

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* scope_name(ReproduceScope s) {
  switch (s) {
    case ReproduceScope::Lifetimes: return "lifetimes";
    case ReproduceScope::Beats: return "beats";
    case ReproduceScope::Coherence: return "coherence";
    case ReproduceScope::All: return "all";
  }
  return "all";
}

}  // namespace

ReproductionReport reproduce(ReproduceScope scope, const RunConfig& config) {
  ReproductionReport report;
  report.version = toolkit_version();
  report.config_hash = fnv1a_hex(config_to_json(config));
  report.seed = config.seed;
  report.scope = scope_name(scope);

  ReproduceOptions opts;
  opts.seed = config.seed;
  const bool all = scope == ReproduceScope::All;

  if (all || scope == ReproduceScope::Lifetimes) {
    const auto catalog = resolve_catalog(config);
    report.lifetimes = reproduce_lifetimes(catalog, opts);
    std::size_t passed = 0;
    for (const auto& r : report.lifetimes) passed += r.pass;
    report.criteria.push_back({"lifetimes", "lifetime round trip within max(quoted error, 5%)",
                               !report.lifetimes.empty() && passed == report.lifetimes.size(),
                               std::to_string(passed) + "/" + std::to_string(report.lifetimes.size()) +
                                   " states"});
  }
  if (all || scope == ReproduceScope::Beats) {
    const auto catalog = resolve_catalog(config);
    report.beats = reproduce_beats(catalog, opts);
    std::size_t passed = 0;
    for (const auto& r : report.beats) passed += r.pass;
    report.criteria.push_back({"beats", "major beat frequency and pair per time trace",
                               !report.beats.empty() && passed == report.beats.size(),
                               std::to_string(passed) + "/" + std::to_string(report.beats.size()) +
                                   " traces"});
  }
  if (all || scope == ReproduceScope::Coherence) {
    report.coherence = reproduce_coherence(opts);
    std::size_t passed = 0;
    for (const auto& r : report.coherence) passed += r.pass;
    report.criteria.push_back({"coherence", "T2 from the fringe pipeline within the expected band",
                               !report.coherence.empty() && passed == report.coherence.size(),
                               std::to_string(passed) + "/" +
                                   std::to_string(report.coherence.size()) + " stacks"});
  }
  report.all_pass = std::all_of(report.criteria.begin(), report.criteria.end(),
                                [](const CriterionResult& c) { return c.pass; });
  return report;
}

std::string report_to_json(const ReproductionReport& r) {
  json doc;
  doc["toolkit_version"] = r.version;
  doc["config_hash"] = r.config_hash;
  doc["seed"] = r.seed;
  doc["scope"] = r.scope;
  auto crit = json::array();
  for (const auto& c : r.criteria)
    crit.push_back({{"id", c.id}, {"description", c.description}, {"pass", c.pass}, {"detail", c.detail}});
  doc["criteria"] = crit;
  if (!r.lifetimes.empty()) {
    auto rows = json::array();
    for (const auto& l : r.lifetimes)
      rows.push_back({{"state", l.state.label()},
                      {"reference_source", "catalog"},
                      {"reference_kind", l.source},
                      {"reference_ps", l.reference_ps},
                      {"reference_err_ps", l.reference_err_ps},
                      {"tolerance_ps", l.tolerance_ps},
                      {"recovered_ps", l.recovered_ps},
                      {"recovered_sigma_ps", l.recovered_sigma_ps},
                      {"flags", l.flags},
                      {"pass", l.pass}});
    doc["lifetimes"] = rows;
  }
  if (!r.beats.empty()) {
    auto rows = json::array();
    for (const auto& b : r.beats)
      rows.push_back({{"trace", b.trace},
                      {"reference_source", "beat_scenarios"},
                      {"reference_thz", b.reference_thz},
                      {"reference_err_thz", b.reference_err_thz},
                      {"reference_pair", b.reference_pair},
                      {"recovered_thz", b.recovered_thz ? json(*b.recovered_thz) : json(nullptr)},
                      {"recovered_err_thz", b.recovered_err_thz},
                      {"recovered_pair", b.recovered_pair},
                      {"pass", b.pass}});
    doc["beats"] = rows;
  }
  if (!r.coherence.empty()) {
    auto rows = json::array();
    for (const auto& c : r.coherence)
      rows.push_back({{"label", c.label},
                      {"reference_source", "coherence_scenarios"},
                      {"t1_ps", c.t1_ps},
                      {"pure_dephasing_rate", c.pure_dephasing_rate},
                      {"expected_t2_ps", c.expected_t2_ps},
                      {"t2_low_ps", c.t2_low_ps},
                      {"t2_high_ps", c.t2_high_ps},
                      {"recovered_ps", c.recovered_ps},
                      {"recovered_sigma_ps", c.recovered_sigma_ps},
                      {"bound_ok", c.bound_ok},
                      {"flags", c.flags},
                      {"error", c.error},
                      {"pass", c.pass}});
    doc["coherence"] = rows;
  }
  doc["all_pass"] = r.all_pass;
  return doc.dump(2) + "\n";
}

std::string report_to_text(const ReproductionReport& r) {
  std::ostringstream out;
  char line[256];
  out << "rydbeat " << r.version << "  scope " << r.scope << "  seed " << r.seed << "  config "
      << r.config_hash << "\n";
  if (!r.lifetimes.empty()) {
    out << "\nLifetimes\n";
    std::snprintf(line, sizeof line, "%-6s %10s %8s %10s %8s  %s\n", "state", "ref (ps)", "tol",
                  "fit (ps)", "sigma", "result");
    out << line;
    for (const auto& l : r.lifetimes) {
      std::snprintf(line, sizeof line, "%-6s %10.3f %8.3f %10.3f %8.3f  %s\n",
                    l.state.label().c_str(), l.reference_ps, l.tolerance_ps, l.recovered_ps,
                    l.recovered_sigma_ps, l.pass ? "pass" : "FAIL");
      out << line;
    }
  }
  if (!r.beats.empty()) {
    out << "\nMajor beats\n";
    std::snprintf(line, sizeof line, "%-6s %16s %18s  %-10s %-10s %s\n", "trace", "ref (THz)",
                  "found (THz)", "ref pair", "found pair", "result");
    out << line;
    for (const auto& b : r.beats) {
      std::snprintf(line, sizeof line, "%-6s %7.3f +- %5.3f %8.4f +- %6.4f  %-10s %-10s %s\n",
                    b.trace.c_str(), b.reference_thz, b.reference_err_thz,
                    b.recovered_thz.value_or(std::nan("")), b.recovered_err_thz,
                    b.reference_pair.c_str(),
                    b.recovered_pair.empty() ? "-" : b.recovered_pair.c_str(),
                    b.pass ? "pass" : "FAIL");
      out << line;
    }
  }
  if (!r.coherence.empty()) {
    out << "\nCoherence times\n";
    std::snprintf(line, sizeof line, "%-14s %7s %9s %9s %14s %10s  %s\n", "set", "T1", "gamma_phi",
                  "T2 theo", "band", "T2 fit", "result");
    out << line;
    for (const auto& c : r.coherence) {
      std::snprintf(line, sizeof line, "%-14s %7.2f %9.4f %9.3f [%5.1f, %5.1f] %10.3f  %s\n",
                    c.label.c_str(), c.t1_ps, c.pure_dephasing_rate, c.expected_t2_ps,
                    c.t2_low_ps, c.t2_high_ps, c.recovered_ps, c.pass ? "pass" : "FAIL");
      out << line;
    }
  }
  out << "\n";
  for (const auto& c : r.criteria)
    out << (c.pass ? "PASS " : "FAIL ") << c.id << ": " << c.description << " (" << c.detail
        << ")\n";
  out << (r.all_pass ? "all criteria passed\n" : "some criteria FAILED\n");
  return out.str();
}

CommandResult cmd_reproduce(ReproduceScope scope, const RunConfig& config,
                            const std::string& out_dir) {
  const auto report = reproduce(scope, config);
  prepare_dir(out_dir);
  CommandResult result;
  const auto jpath = join(out_dir, "reproduce.json");
  write_text_file(jpath, report_to_json(report));
  const auto tpath = join(out_dir, "reproduce.txt");
  const auto text = report_to_text(report);
  write_text_file(tpath, text);
  result.files = {jpath, tpath};
  result.summary = text;
  if (!result.summary.empty() && result.summary.back() == '\n') result.summary.pop_back();
  result.ok = report.all_pass;
  return result;
}

}  // namespace rydbeat
