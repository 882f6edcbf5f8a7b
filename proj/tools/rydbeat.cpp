// rydbeat command-line front end. Talks to the library only through the C
// interface.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rydbeat/rydbeat.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

int exit_code(rb_status status) {
  switch (status) {
    case RB_OK: return kExitOk;
    case RB_ERR_PARSE:
    case RB_ERR_CONFIG:
    case RB_ERR_INVALID_INPUT: return kExitUsage;
    default: return kExitFailed;
  }
}

int report_error(rb_status status) {
  std::fprintf(stderr, "rydbeat: error (%s): %s\n", rb_status_string(status), rb_last_error());
  return exit_code(status);
}

void print_summary(char* summary) {
  if (summary && *summary) std::printf("%s\n", summary);
  rb_string_free(summary);
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "rydbeat-out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "random seed (overrides the config)");
  cmd->add_option("-o,--output", c.out_dir, "output directory")->capture_default_str();
}

class ConfigHandle {
 public:
  ~ConfigHandle() { rb_config_free(cfg_); }
  rb_status open(const Common& c) {
    rb_status s = c.config_path.empty() ? rb_config_default(&cfg_)
                                        : rb_config_load(c.config_path.c_str(), &cfg_);
    if (s == RB_OK && c.seed) s = rb_config_set_seed(cfg_, *c.seed);
    return s;
  }
  const rb_config* get() const { return cfg_; }

 private:
  rb_config* cfg_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of Rydberg exciton quantum beats"};
  app.set_version_flag("--version", std::string("rydbeat ") + rb_version());
  app.require_subcommand(1);

  Common common;

  std::string sim_kind;
  auto* sim = app.add_subcommand("simulate", "simulate a trace, spectrogram or fringe sweep");
  sim->add_option("kind", sim_kind, "trace | spectrogram | fringes")
      ->required()
      ->check(CLI::IsMember({"trace", "spectrogram", "fringes"}));
  add_common(sim, common);

  std::string fit_kind, fit_input;
  auto* fit = app.add_subcommand("fit", "fit a trace, a fringe image or a fringe stack");
  fit->add_option("kind", fit_kind, "lifetime | fringe | coherence")
      ->required()
      ->check(CLI::IsMember({"lifetime", "fringe", "coherence"}));
  fit->add_option("input", fit_input, "trace CSV, fringe CSV or fringes.json manifest")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(fit, common);

  std::string beats_input;
  auto* beats = app.add_subcommand("beats", "beat spectrum and assignment of a time trace");
  beats->add_option("input", beats_input, "trace CSV")->required()->check(CLI::ExistingFile);
  add_common(beats, common);

  std::string scope = "all";
  auto* rep = app.add_subcommand("reproduce", "self-contained reproduction report");
  rep->add_option("scope", scope, "lifetimes | beats | coherence | all")
      ->check(CLI::IsMember({"lifetimes", "beats", "coherence", "all"}))
      ->capture_default_str();
  add_common(rep, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  ConfigHandle cfg;
  if (rb_status s = cfg.open(common); s != RB_OK) return report_error(s);
  const char* out = common.out_dir.c_str();
  char* summary = nullptr;

  if (sim->parsed()) {
    const rb_status s = rb_cmd_simulate(cfg.get(), sim_kind.c_str(), out, &summary);
    if (s != RB_OK) return report_error(s);
    print_summary(summary);
    return kExitOk;
  }
  if (fit->parsed()) {
    int ok = 0;
    const rb_status s = rb_cmd_fit(cfg.get(), fit_kind.c_str(), fit_input.c_str(), out, &ok, &summary);
    if (s != RB_OK) return report_error(s);
    print_summary(summary);
    if (!ok) std::fprintf(stderr, "rydbeat: warning: fit flagged, see the JSON output\n");
    return kExitOk;
  }
  if (beats->parsed()) {
    const rb_status s = rb_cmd_beats(cfg.get(), beats_input.c_str(), out, &summary);
    if (s != RB_OK) return report_error(s);
    print_summary(summary);
    return kExitOk;
  }
  int ok = 0;
  const rb_status s = rb_cmd_reproduce(cfg.get(), scope.c_str(), out, &ok, &summary);
  if (s != RB_OK) return report_error(s);
  print_summary(summary);
  return ok ? kExitOk : kExitFailed;
}
