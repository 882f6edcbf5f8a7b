/* rydbeat C interface.
 *
 * Every function returns an rb_status; on failure rb_last_error() gives a
 * message for the calling thread. Objects are opaque handles released with
 * their matching *_free function. Strings returned through char** are owned
 * by the caller and released with rb_string_free.
 */
#ifndef RYDBEAT_H
#define RYDBEAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RB_API __declspec(dllexport)
#else
#define RB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rb_status {
  RB_OK = 0,
  RB_ERR_INVALID_INPUT = 1,
  RB_ERR_NOT_FOUND = 2,
  RB_ERR_INSUFFICIENT_DATA = 3,
  RB_ERR_DEGENERATE_FIT = 4,
  RB_ERR_INSUFFICIENT_COVERAGE = 5,
  RB_ERR_INSUFFICIENT_DECAY = 6,
  RB_ERR_IO = 7,
  RB_ERR_PARSE = 8,
  RB_ERR_CONFIG = 9,
  RB_ERR_INTERNAL = 100
} rb_status;

typedef struct rb_catalog rb_catalog;
typedef struct rb_config rb_config;
typedef struct rb_trace rb_trace;
typedef struct rb_fit rb_fit;
typedef struct rb_beat_report rb_beat_report;

RB_API const char* rb_version(void);
RB_API const char* rb_status_string(rb_status status);
/* Message of the last failed call on this thread; empty after success. */
RB_API const char* rb_last_error(void);
RB_API void rb_string_free(char* s);

/* Units */
RB_API rb_status rb_thz_to_mev(double nu_thz, double* e_mev);
RB_API rb_status rb_mev_to_thz(double e_mev, double* nu_thz);
RB_API rb_status rb_inverse_linewidth(double gamma_mev, double* tau_ps);

/* State catalog */
RB_API rb_status rb_catalog_embedded(rb_catalog** out);
RB_API rb_status rb_catalog_load(const char* path, rb_catalog** out);
RB_API void rb_catalog_free(rb_catalog* catalog);
RB_API rb_status rb_catalog_size(const rb_catalog* catalog, size_t* count);
RB_API rb_status rb_catalog_lifetime(const rb_catalog* catalog, const char* label,
                                     double* lifetime_ps, double* err_ps);
/* overridden is set to 1 when the split is a quoted value, 0 otherwise. */
RB_API rb_status rb_energy_split(const rb_catalog* catalog, const char* a, const char* b,
                                 double* split_mev, int* overridden);
RB_API rb_status rb_catalog_json(const rb_catalog* catalog, char** json);

/* Time traces */
/* Copies n >= 2 samples. */
RB_API rb_status rb_trace_create(const double* t, const double* intensity, size_t n,
                                 rb_trace** out);
RB_API rb_status rb_trace_load(const char* path, rb_trace** out);
RB_API void rb_trace_free(rb_trace* trace);
RB_API rb_status rb_trace_size(const rb_trace* trace, size_t* n);
/* Pointers stay valid until the trace is freed. */
RB_API rb_status rb_trace_data(const rb_trace* trace, const double** t,
                               const double** intensity);

/* Lifetime fit. irf_fwhm_ps <= 0 starts the IRF width at 1 ps sigma. */
RB_API rb_status rb_fit_lifetime(const rb_trace* trace, double irf_fwhm_ps, rb_fit** out);
RB_API void rb_fit_free(rb_fit* fit);
RB_API rb_status rb_fit_param(const rb_fit* fit, const char* name, double* value, double* sigma);
RB_API rb_status rb_fit_converged(const rb_fit* fit, int* converged);
RB_API rb_status rb_fit_json(const rb_fit* fit, char** json);

/* Beat analysis. anchor may be NULL (no restriction). */
RB_API rb_status rb_beat_report_run(const rb_trace* trace, const rb_catalog* catalog,
                                    const char* anchor, rb_beat_report** out);
RB_API void rb_beat_report_free(rb_beat_report* report);
RB_API rb_status rb_beat_report_peaks(const rb_beat_report* report, size_t* count);
/* Peak i: frequency, its uncertainty, and the top candidate pair ("" if none)
 * copied into pair (capacity pair_len). */
RB_API rb_status rb_beat_report_peak(const rb_beat_report* report, size_t i, double* nu_thz,
                                     double* nu_err_thz, char* pair, size_t pair_len);
RB_API rb_status rb_beat_report_json(const rb_beat_report* report, char** json);

/* Run configuration */
RB_API rb_status rb_config_default(rb_config** out);
RB_API rb_status rb_config_load(const char* path, rb_config** out);
RB_API rb_status rb_config_parse(const char* json, rb_config** out);
RB_API void rb_config_free(rb_config* config);
RB_API rb_status rb_config_set_seed(rb_config* config, uint64_t seed);
RB_API rb_status rb_config_json(const rb_config* config, char** json);

/* Commands. `ok` receives 0 when a fit or criterion failed (the outputs are
 * still written); summary, when not NULL, receives a short report. */
RB_API rb_status rb_cmd_simulate(const rb_config* config, const char* kind, const char* out_dir,
                                 char** summary);
RB_API rb_status rb_cmd_fit(const rb_config* config, const char* kind, const char* input,
                            const char* out_dir, int* ok, char** summary);
RB_API rb_status rb_cmd_beats(const rb_config* config, const char* input, const char* out_dir,
                              char** summary);
RB_API rb_status rb_cmd_reproduce(const rb_config* config, const char* scope,
                                  const char* out_dir, int* ok, char** summary);

#ifdef __cplusplus
}
#endif

#endif
