/* C-only client of the shared library. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rydbeat/rydbeat.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define EXPECT_OK(call)                                                            \
  do {                                                                             \
    rb_status st_ = (call);                                                        \
    if (st_ != RB_OK) {                                                            \
      fprintf(stderr, "%s:%d: %s -> %s (%s)\n", __FILE__, __LINE__, #call,         \
              rb_status_string(st_), rb_last_error());                             \
      ++failures;                                                                  \
    }                                                                              \
  } while (0)

static int near(double a, double b, double tol) { return fabs(a - b) <= tol; }

int main(int argc, char** argv) {
  const char* out = argc > 1 ? argv[1] : "capi-out";
  char path[1024];

  EXPECT(strlen(rb_version()) > 0);
  EXPECT(strcmp(rb_status_string(RB_OK), rb_status_string(RB_ERR_PARSE)) != 0);

  double e = 0, nu = 0, tau = 0;
  EXPECT_OK(rb_thz_to_mev(0.30, &e));
  EXPECT(near(e, 1.2407, 5e-5));
  EXPECT_OK(rb_mev_to_thz(e, &nu));
  EXPECT(near(nu, 0.30, 1e-12));
  EXPECT_OK(rb_inverse_linewidth(0.1316, &tau));
  EXPECT(near(tau, 5.0, 0.01));
  EXPECT(rb_thz_to_mev(-1.0, &e) == RB_ERR_INVALID_INPUT);
  EXPECT(strlen(rb_last_error()) > 0);
  EXPECT(rb_thz_to_mev(1.0, NULL) == RB_ERR_INVALID_INPUT);

  rb_catalog* cat = NULL;
  EXPECT_OK(rb_catalog_embedded(&cat));
  size_t count = 0;
  EXPECT_OK(rb_catalog_size(cat, &count));
  EXPECT(count == 20);
  double life = 0, err = 0;
  EXPECT_OK(rb_catalog_lifetime(cat, "3S", &life, &err));
  EXPECT(near(life, 3.1, 1e-12));
  EXPECT(rb_catalog_lifetime(cat, "9F", &life, &err) == RB_ERR_NOT_FOUND);
  EXPECT(rb_catalog_lifetime(cat, "zz", &life, &err) == RB_ERR_INVALID_INPUT);
  double split = 0;
  int overridden = -1;
  EXPECT_OK(rb_energy_split(cat, "4S", "4D2", &split, &overridden));
  EXPECT(near(split, 1.21, 1e-12));
  EXPECT(overridden == 1);
  char* text = NULL;
  EXPECT_OK(rb_catalog_json(cat, &text));
  EXPECT(text && strstr(text, "\"4D2\"") != NULL);
  rb_string_free(text);
  rb_catalog* missing = NULL;
  EXPECT(rb_catalog_load("/nonexistent/cat.json", &missing) == RB_ERR_IO);
  EXPECT(missing == NULL);

  /* Noise-free decay: exp(-t/5) convolved with a narrow Gaussian. */
  enum { N = 900 };
  double t[N], y[N];
  for (int i = 0; i < N; ++i) {
    t[i] = -10.0 + 0.1 * i;
    const double s = 1.0, tau0 = 5.0, dt = t[i];
    y[i] = 1000.0 * 0.5 / tau0 * exp(0.5 * s * s / (tau0 * tau0) - dt / tau0) *
           erfc((s / tau0 - dt / s) / sqrt(2.0));
  }
  rb_trace* trace = NULL;
  EXPECT_OK(rb_trace_create(t, y, N, &trace));
  size_t n = 0;
  EXPECT_OK(rb_trace_size(trace, &n));
  EXPECT(n == N);
  const double* tp = NULL;
  const double* yp = NULL;
  EXPECT_OK(rb_trace_data(trace, &tp, &yp));
  EXPECT(tp && tp[5] == t[5] && yp[5] == y[5]);
  rb_fit* fit = NULL;
  EXPECT_OK(rb_fit_lifetime(trace, 2.355, &fit));
  double v = 0, sv = 0;
  EXPECT_OK(rb_fit_param(fit, "tau", &v, &sv));
  EXPECT(near(v, 5.0, 1e-5));
  int conv = 0;
  EXPECT_OK(rb_fit_converged(fit, &conv));
  EXPECT(conv == 1);
  EXPECT(rb_fit_param(fit, "T9", &v, &sv) == RB_ERR_NOT_FOUND);
  EXPECT_OK(rb_fit_json(fit, &text));
  EXPECT(text && strstr(text, "\"tau\"") != NULL);
  rb_string_free(text);
  rb_fit_free(fit);

  rb_beat_report* rep = NULL;
  EXPECT_OK(rb_beat_report_run(trace, cat, NULL, &rep));
  size_t peaks = 99;
  EXPECT_OK(rb_beat_report_peaks(rep, &peaks));
  EXPECT(peaks == 0);
  double pnu, perr;
  char pair[32];
  EXPECT(rb_beat_report_peak(rep, 0, &pnu, &perr, pair, sizeof pair) == RB_ERR_INVALID_INPUT);
  rb_beat_report_free(rep);
  rb_trace_free(trace);

  rb_trace* tiny = NULL;
  EXPECT(rb_trace_create(t, y, 0, &tiny) == RB_ERR_INVALID_INPUT);

  /* Config and commands. */
  rb_config* cfg = NULL;
  EXPECT(rb_config_parse("{\"bogus\": 1}", &cfg) == RB_ERR_CONFIG);
  const rb_status broken = rb_config_parse("{", &cfg);
  EXPECT(broken == RB_ERR_CONFIG || broken == RB_ERR_PARSE);
  EXPECT_OK(rb_config_parse(
      "{\"emitters\": [\"4S\", \"4D2\"], \"time_grid\": {\"start\": -10, \"stop\": 120, "
      "\"step\": 0.1}, \"analysis\": {\"anchors\": [\"4S\"]}}",
      &cfg));
  EXPECT_OK(rb_config_set_seed(cfg, 5));
  EXPECT_OK(rb_config_json(cfg, &text));
  EXPECT(text && strstr(text, "\"seed\": 5") != NULL);
  rb_string_free(text);

  char* summary = NULL;
  EXPECT_OK(rb_cmd_simulate(cfg, "trace", out, &summary));
  EXPECT(summary != NULL);
  rb_string_free(summary);
  EXPECT(rb_cmd_simulate(cfg, "hologram", out, NULL) == RB_ERR_INVALID_INPUT);

  snprintf(path, sizeof path, "%s/trace.csv", out);
  int ok = 0;
  EXPECT_OK(rb_cmd_fit(cfg, "lifetime", path, out, &ok, NULL));
  EXPECT(ok == 1);
  EXPECT_OK(rb_cmd_beats(cfg, path, out, NULL));

  rb_trace* loaded = NULL;
  EXPECT_OK(rb_trace_load(path, &loaded));
  EXPECT_OK(rb_beat_report_run(loaded, cat, "4S", &rep));
  EXPECT_OK(rb_beat_report_peaks(rep, &peaks));
  EXPECT(peaks >= 1);
  if (peaks >= 1) {
    EXPECT_OK(rb_beat_report_peak(rep, 0, &pnu, &perr, pair, sizeof pair));
    EXPECT(near(pnu, 0.2926, 0.0125));
    EXPECT(strcmp(pair, "4S-4D2") == 0);
  }
  rb_beat_report* bad = NULL;
  EXPECT(rb_beat_report_run(loaded, cat, "Q", &bad) == RB_ERR_INVALID_INPUT);
  EXPECT(bad == NULL);
  rb_beat_report_free(rep);
  rb_trace_free(loaded);

  snprintf(path, sizeof path, "%s/absent.csv", out);
  EXPECT(rb_cmd_fit(cfg, "lifetime", path, out, &ok, NULL) == RB_ERR_IO);

  rb_config_free(cfg);
  rb_catalog_free(cat);
  rb_catalog_free(NULL);
  rb_trace_free(NULL);

  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
