#include "rydbeat/rydbeat.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "rydbeat/beats.hpp"
#include "rydbeat/commands.hpp"
#include "rydbeat/config.hpp"
#include "rydbeat/error.hpp"
#include "rydbeat/fitting.hpp"
#include "rydbeat/io.hpp"
#include "rydbeat/states.hpp"

struct rb_catalog {
  rydbeat::StateCatalog value;
};
struct rb_config {
  rydbeat::RunConfig value;
};
struct rb_trace {
  rydbeat::TimeTrace value;
};
struct rb_fit {
  rydbeat::FitResult value;
};
struct rb_beat_report {
  rydbeat::BeatReport value;
};

namespace {

thread_local std::string g_last_error;

rb_status to_status(rydbeat::ErrorCode code) {
  using rydbeat::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidInput: return RB_ERR_INVALID_INPUT;
    case ErrorCode::NotFound: return RB_ERR_NOT_FOUND;
    case ErrorCode::InsufficientData: return RB_ERR_INSUFFICIENT_DATA;
    case ErrorCode::DegenerateFit: return RB_ERR_DEGENERATE_FIT;
    case ErrorCode::InsufficientCoverage: return RB_ERR_INSUFFICIENT_COVERAGE;
    case ErrorCode::InsufficientDecay: return RB_ERR_INSUFFICIENT_DECAY;
    case ErrorCode::Io: return RB_ERR_IO;
    case ErrorCode::Parse: return RB_ERR_PARSE;
    case ErrorCode::Config: return RB_ERR_CONFIG;
  }
  return RB_ERR_INTERNAL;
}

template <class F>
rb_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return RB_OK;
  } catch (const rydbeat::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RB_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) rydbeat::fail(rydbeat::ErrorCode::InvalidInput, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_summary(char** summary, const std::string& text) {
  if (summary) *summary = dup_string(text);
}

}  // namespace

extern "C" {

const char* rb_version(void) { return rydbeat::toolkit_version(); }

const char* rb_status_string(rb_status status) {
  switch (status) {
    case RB_OK: return "ok";
    case RB_ERR_INTERNAL: return "internal";
    default: return rydbeat::to_string(static_cast<rydbeat::ErrorCode>(status));
  }
}

const char* rb_last_error(void) { return g_last_error.c_str(); }

void rb_string_free(char* s) { std::free(s); }

rb_status rb_thz_to_mev(double nu_thz, double* e_mev) {
  return guard([&] {
    require(e_mev, "e_mev");
    *e_mev = rydbeat::thz_to_mev(nu_thz);
  });
}

rb_status rb_mev_to_thz(double e_mev, double* nu_thz) {
  return guard([&] {
    require(nu_thz, "nu_thz");
    *nu_thz = rydbeat::mev_to_thz(e_mev);
  });
}

rb_status rb_inverse_linewidth(double gamma_mev, double* tau_ps) {
  return guard([&] {
    require(tau_ps, "tau_ps");
    *tau_ps = rydbeat::inverse_linewidth(gamma_mev);
  });
}

rb_status rb_catalog_embedded(rb_catalog** out) {
  return guard([&] {
    require(out, "out");
    *out = new rb_catalog{rydbeat::StateCatalog::embedded()};
  });
}

rb_status rb_catalog_load(const char* path, rb_catalog** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new rb_catalog{rydbeat::load_catalog(path)};
  });
}

void rb_catalog_free(rb_catalog* catalog) { delete catalog; }

rb_status rb_catalog_size(const rb_catalog* catalog, size_t* count) {
  return guard([&] {
    require(catalog, "catalog");
    require(count, "count");
    *count = catalog->value.records().size();
  });
}

rb_status rb_catalog_lifetime(const rb_catalog* catalog, const char* label, double* lifetime_ps,
                              double* err_ps) {
  return guard([&] {
    require(catalog, "catalog");
    require(label, "label");
    const auto& rec = catalog->value.at(rydbeat::StateId::parse(label));
    if (lifetime_ps) *lifetime_ps = rec.lifetime_ps;
    if (err_ps) *err_ps = rec.lifetime_err_ps;
  });
}

rb_status rb_energy_split(const rb_catalog* catalog, const char* a, const char* b,
                          double* split_mev, int* overridden) {
  return guard([&] {
    require(catalog, "catalog");
    require(a, "a");
    require(b, "b");
    const auto r = rydbeat::energy_split(rydbeat::StateId::parse(a), rydbeat::StateId::parse(b),
                                         catalog->value);
    if (split_mev) *split_mev = r.split_meV;
    if (overridden) *overridden = r.overridden ? 1 : 0;
  });
}

rb_status rb_catalog_json(const rb_catalog* catalog, char** json) {
  return guard([&] {
    require(catalog, "catalog");
    require(json, "json");
    *json = dup_string(rydbeat::catalog_to_json(catalog->value));
  });
}

rb_status rb_trace_create(const double* t, const double* intensity, size_t n, rb_trace** out) {
  return guard([&] {
    require(out, "out");
    require(t, "t");
    require(intensity, "intensity");
    if (n < 2) rydbeat::fail(rydbeat::ErrorCode::InvalidInput, "a trace needs at least 2 samples");
    auto* tr = new rb_trace;
    tr->value.t.assign(t, t + n);
    tr->value.intensity.assign(intensity, intensity + n);
    *out = tr;
  });
}

rb_status rb_trace_load(const char* path, rb_trace** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new rb_trace{rydbeat::load_trace(path)};
  });
}

void rb_trace_free(rb_trace* trace) { delete trace; }

rb_status rb_trace_size(const rb_trace* trace, size_t* n) {
  return guard([&] {
    require(trace, "trace");
    require(n, "n");
    *n = trace->value.t.size();
  });
}

rb_status rb_trace_data(const rb_trace* trace, const double** t, const double** intensity) {
  return guard([&] {
    require(trace, "trace");
    if (t) *t = trace->value.t.data();
    if (intensity) *intensity = trace->value.intensity.data();
  });
}

rb_status rb_fit_lifetime(const rb_trace* trace, double irf_fwhm_ps, rb_fit** out) {
  return guard([&] {
    require(trace, "trace");
    require(out, "out");
    rydbeat::LifetimeFitOptions o;
    if (irf_fwhm_ps > 0) o.irf_fwhm_ps = irf_fwhm_ps;
    *out = new rb_fit{rydbeat::fit_lifetime(trace->value, o)};
  });
}

void rb_fit_free(rb_fit* fit) { delete fit; }

rb_status rb_fit_param(const rb_fit* fit, const char* name, double* value, double* sigma) {
  return guard([&] {
    require(fit, "fit");
    require(name, "name");
    if (value) *value = fit->value.value(name);
    if (sigma) *sigma = fit->value.sigma(name);
  });
}

rb_status rb_fit_converged(const rb_fit* fit, int* converged) {
  return guard([&] {
    require(fit, "fit");
    require(converged, "converged");
    *converged = fit->value.converged ? 1 : 0;
  });
}

rb_status rb_fit_json(const rb_fit* fit, char** json) {
  return guard([&] {
    require(fit, "fit");
    require(json, "json");
    *json = dup_string(rydbeat::fit_result_to_json(fit->value));
  });
}

rb_status rb_beat_report_run(const rb_trace* trace, const rb_catalog* catalog,
                             const char* anchor, rb_beat_report** out) {
  return guard([&] {
    require(trace, "trace");
    require(catalog, "catalog");
    require(out, "out");
    rydbeat::BeatReportOptions o;
    if (anchor && *anchor) o.assign.anchors.push_back(rydbeat::StateId::parse(anchor));
    *out = new rb_beat_report{rydbeat::beat_report(trace->value, catalog->value, o)};
  });
}

void rb_beat_report_free(rb_beat_report* report) { delete report; }

rb_status rb_beat_report_peaks(const rb_beat_report* report, size_t* count) {
  return guard([&] {
    require(report, "report");
    require(count, "count");
    *count = report->value.rows.size();
  });
}

rb_status rb_beat_report_peak(const rb_beat_report* report, size_t i, double* nu_thz,
                              double* nu_err_thz, char* pair, size_t pair_len) {
  return guard([&] {
    require(report, "report");
    if (i >= report->value.rows.size())
      rydbeat::fail(rydbeat::ErrorCode::InvalidInput, "peak index out of range");
    const auto& row = report->value.rows[i];
    if (nu_thz) *nu_thz = row.peak.nu_thz;
    if (nu_err_thz) *nu_err_thz = row.peak.nu_err_thz;
    if (pair && pair_len > 0) {
      const std::string label = row.candidates.empty() ? "" : row.candidates.front().label();
      const std::size_t n = std::min(label.size(), pair_len - 1);
      std::memcpy(pair, label.data(), n);
      pair[n] = '\0';
    }
  });
}

rb_status rb_beat_report_json(const rb_beat_report* report, char** json) {
  return guard([&] {
    require(report, "report");
    require(json, "json");
    *json = dup_string(rydbeat::beat_report_json(report->value));
  });
}

rb_status rb_config_default(rb_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new rb_config{};
  });
}

rb_status rb_config_load(const char* path, rb_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new rb_config{rydbeat::load_config(path)};
  });
}

rb_status rb_config_parse(const char* json, rb_config** out) {
  return guard([&] {
    require(json, "json");
    require(out, "out");
    *out = new rb_config{rydbeat::config_from_json(json)};
  });
}

void rb_config_free(rb_config* config) { delete config; }

rb_status rb_config_set_seed(rb_config* config, uint64_t seed) {
  return guard([&] {
    require(config, "config");
    config->value.seed = seed;
  });
}

rb_status rb_config_json(const rb_config* config, char** json) {
  return guard([&] {
    require(config, "config");
    require(json, "json");
    *json = dup_string(rydbeat::config_to_json(config->value));
  });
}

rb_status rb_cmd_simulate(const rb_config* config, const char* kind, const char* out_dir,
                          char** summary) {
  return guard([&] {
    require(config, "config");
    require(kind, "kind");
    require(out_dir, "out_dir");
    const auto r = rydbeat::cmd_simulate(rydbeat::parse_simulate_kind(kind), config->value, out_dir);
    set_summary(summary, r.summary);
  });
}

rb_status rb_cmd_fit(const rb_config* config, const char* kind, const char* input,
                     const char* out_dir, int* ok, char** summary) {
  return guard([&] {
    require(config, "config");
    require(kind, "kind");
    require(input, "input");
    require(out_dir, "out_dir");
    const auto r = rydbeat::cmd_fit(rydbeat::parse_fit_kind(kind), input, config->value, out_dir);
    if (ok) *ok = r.ok ? 1 : 0;
    set_summary(summary, r.summary);
  });
}

rb_status rb_cmd_beats(const rb_config* config, const char* input, const char* out_dir,
                       char** summary) {
  return guard([&] {
    require(config, "config");
    require(input, "input");
    require(out_dir, "out_dir");
    const auto r = rydbeat::cmd_beats(input, config->value, out_dir);
    set_summary(summary, r.summary);
  });
}

rb_status rb_cmd_reproduce(const rb_config* config, const char* scope, const char* out_dir,
                           int* ok, char** summary) {
  return guard([&] {
    require(config, "config");
    require(scope, "scope");
    require(out_dir, "out_dir");
    const auto r = rydbeat::cmd_reproduce(rydbeat::parse_reproduce_scope(scope), config->value,
                                          out_dir);
    if (ok) *ok = r.ok ? 1 : 0;
    set_summary(summary, r.summary);
  });
}

}  // extern "C"
