#include "rydbeat/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

#include "json.hpp"
#include "rydbeat/error.hpp"
#include "rydbeat/grid.hpp"
#include "rydbeat/io.hpp"

namespace rydbeat {

using json = nlohmann::ordered_json;

std::vector<double> GridSpec::values() const {
  return UniformGrid::from_range(start, stop, step).values();
}

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& msg) {
  fail(ErrorCode::Config, field + ": " + msg);
}

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* get(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = node_.find(std::string(key));
    if (it == node_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void number(std::string_view key, double& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number()) config_fail(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  void number(std::string_view key, std::optional<double>& out) {
    seen_.insert(std::string(key));
    auto it = node_.find(std::string(key));
    if (it == node_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    if (!it->is_number()) config_fail(field(key), "expected a number or null");
    out = it->get<double>();
  }

  void positive(std::string_view key, double& out) {
    number(key, out);
    if (!(out > 0)) config_fail(field(key), "must be positive");
  }

  void boolean(std::string_view key, bool& out) {
    if (const auto* v = get(key)) {
      if (!v->is_boolean()) config_fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void integer(std::string_view key, int& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number_integer()) config_fail(field(key), "expected an integer");
      out = v->get<int>();
    }
  }

  std::optional<std::string> text(std::string_view key) {
    if (const auto* v = get(key)) {
      if (!v->is_string()) config_fail(field(key), "expected a string");
      return v->get<std::string>();
    }
    return std::nullopt;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) config_fail(field(it.key()), "unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

StateId parse_state(const json& v, const std::string& field) {
  if (!v.is_string()) config_fail(field, "expected a state label");
  try {
    return StateId::parse(v.get<std::string>());
  } catch (const Error& e) {
    config_fail(field, e.what());
  }
}

void read_grid(Section& parent, std::string_view key, GridSpec& grid) {
  if (const auto* v = parent.get(key)) {
    Section s(*v, parent.field(key));
    s.number("start", grid.start);
    s.number("stop", grid.stop);
    s.positive("step", grid.step);
    s.finish();
    if (!(grid.stop >= grid.start)) config_fail(parent.field(key), "stop must not precede start");
  }
}

template <class Enum>
Enum choose(const std::string& value, const std::string& field,
            std::initializer_list<std::pair<const char*, Enum>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  config_fail(field, "unknown value '" + value + "' (expected one of " + names + ")");
}

const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::Poisson: return "poisson";
    case NoiseKind::Gaussian: return "gaussian";
  }
  return "none";
}

json grid_json(const GridSpec& g) { return {{"start", g.start}, {"stop", g.stop}, {"step", g.step}}; }

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

RunConfig config_from_json(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, origin + ": " + e.what());
  }
  RunConfig cfg;
  Section root(doc, "");

  if (auto c = root.text("catalog")) {
    if (c->empty()) config_fail("catalog", "must name a file or 'embedded'");
    cfg.catalog = *c;
  }
  if (const auto* v = root.get("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
      config_fail("seed", "expected a nonnegative integer");
    cfg.seed = v->get<std::uint64_t>();
  }
  if (const auto* v = root.get("emitters")) {
    if (!v->is_array() || v->empty()) config_fail("emitters", "expected a nonempty array");
    cfg.emitters.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string path = "emitters[" + std::to_string(i) + "]";
      const auto& item = (*v)[i];
      EmitterSpec e;
      if (item.is_string()) {
        e.state = parse_state(item, path);
      } else {
        Section s(item, path);
        const auto* st = s.get("state");
        if (!st) config_fail(s.field("state"), "missing");
        e.state = parse_state(*st, s.field("state"));
        s.number("energy_meV", e.energy_meV);
        s.number("lifetime_ps", e.lifetime_ps);
        if (e.lifetime_ps && !(*e.lifetime_ps > 0)) config_fail(s.field("lifetime_ps"), "must be positive");
        s.number("amplitude", e.amplitude);
        if (!(e.amplitude >= 0)) config_fail(s.field("amplitude"), "must be nonnegative");
        s.number("phase", e.phase);
        s.finish();
      }
      cfg.emitters.push_back(e);
    }
  }
  if (const auto* v = root.get("reference")) cfg.reference = parse_state(*v, "reference");
  root.number("cross_visibility", cfg.cross_visibility);
  if (!(cfg.cross_visibility >= 0 && cfg.cross_visibility <= 1))
    config_fail("cross_visibility", "must lie in [0, 1]");
  root.number("pure_dephasing_rate", cfg.pure_dephasing_rate);
  if (!(cfg.pure_dephasing_rate >= 0)) config_fail("pure_dephasing_rate", "must be nonnegative");
  root.number("shg_prompt_amplitude", cfg.shg_prompt_amplitude);
  if (!(cfg.shg_prompt_amplitude >= 0)) config_fail("shg_prompt_amplitude", "must be nonnegative");

  if (const auto* v = root.get("instrument")) {
    Section s(*v, "instrument");
    s.positive("time_fwhm_ps", cfg.instrument.time_fwhm_ps);
    s.positive("energy_fwhm_meV", cfg.instrument.energy_fwhm_meV);
    s.finish();
  }
  read_grid(root, "time_grid", cfg.time);
  read_grid(root, "energy_grid", cfg.energy);
  {
    auto it = doc.find("channel");
    root.get("channel");
    if (it != doc.end() && !it->is_null()) {
      Section s(*it, "channel");
      ChannelSpec ch;
      s.number("center_meV", ch.center_meV);
      s.positive("fwhm_meV", ch.fwhm_meV);
      s.finish();
      cfg.channel = ch;
    }
  }
  if (const auto* v = root.get("noise")) {
    Section s(*v, "noise");
    if (auto k = s.text("kind"))
      cfg.noise.kind = choose<NoiseKind>(*k, s.field("kind"),
                                         {{"none", NoiseKind::None},
                                          {"poisson", NoiseKind::Poisson},
                                          {"gaussian", NoiseKind::Gaussian}});
    s.positive("peak_counts", cfg.noise.peak_counts);
    s.positive("sigma", cfg.noise.sigma);
    s.finish();
  }
  if (const auto* v = root.get("fringes")) {
    Section s(*v, "fringes");
    read_grid(s, "delays", cfg.delays);
    s.number("x0", cfg.geometry.x0);
    s.positive("sigma_x", cfg.geometry.sigma_x);
    s.positive("k", cfg.geometry.k);
    s.number("phi", cfg.geometry.phi);
    s.positive("amplitude", cfg.geometry.amplitude);
    if (const auto* px = s.get("pixels")) {
      if (!px->is_number_integer() || px->get<std::int64_t>() < 16)
        config_fail(s.field("pixels"), "expected an integer >= 16");
      cfg.geometry.pixels = px->get<std::size_t>();
    }
    s.positive("channel_fwhm_meV", cfg.fringe_channel_fwhm_meV);
    s.finish();
  }
  if (const auto* v = root.get("analysis")) {
    Section s(*v, "analysis");
    auto& a = cfg.analysis;
    s.number("irf_fwhm_ps", a.irf_fwhm_ps);
    if (a.irf_fwhm_ps && !(*a.irf_fwhm_ps > 0)) config_fail(s.field("irf_fwhm_ps"), "must be positive");
    s.boolean("fix_irf", a.fix_irf);
    s.boolean("fit_prompt", a.fit_prompt);
    if (auto w = s.text("weighting"))
      a.weighting = choose<Weighting>(*w, s.field("weighting"),
                                      {{"unit", Weighting::Unit}, {"poisson", Weighting::Poisson}});
    if (auto d = s.text("detrend"))
      a.detrend = choose<DetrendMethod>(*d, s.field("detrend"),
                                        {{"emg_residual", DetrendMethod::EmgResidual},
                                         {"moving_mean", DetrendMethod::MovingMean}});
    s.positive("moving_mean_width_ps", a.moving_mean_width_ps);
    if (auto w = s.text("window"))
      a.window = choose<Window>(*w, s.field("window"), {{"hann", Window::Hann}, {"rect", Window::Rect}});
    s.integer("pad_factor", a.pad_factor);
    if (a.pad_factor < 1) config_fail(s.field("pad_factor"), "must be >= 1");
    s.number("min_prominence", a.min_prominence);
    if (!(a.min_prominence >= 0 && a.min_prominence <= 1))
      config_fail(s.field("min_prominence"), "must lie in [0, 1]");
    s.positive("false_alarm", a.false_alarm);
    s.positive("tolerance_meV", a.tolerance_meV);
    s.number("start_after_peak_ps", a.start_after_peak_ps);
    if (const auto* an = s.get("anchors")) {
      if (!an->is_array()) config_fail(s.field("anchors"), "expected an array of state labels");
      for (std::size_t i = 0; i < an->size(); ++i)
        a.anchors.push_back(parse_state((*an)[i], s.field("anchors") + "[" + std::to_string(i) + "]"));
    }
    s.boolean("include_neighbor_n", a.include_neighbor_n);
    s.number("channel_center_meV", a.channel_center_meV);
    s.number("channel_half_width_meV", a.channel_half_width_meV);
    if (!(a.channel_half_width_meV >= 0)) config_fail(s.field("channel_half_width_meV"), "must be nonnegative");
    if (auto d = s.text("decay_shape"))
      a.decay_shape = choose<DecayShape>(*d, s.field("decay_shape"),
                                         {{"exponential", DecayShape::Exponential},
                                          {"gaussian", DecayShape::Gaussian}});
    s.number("t1_ps", a.t1_ps);
    if (a.t1_ps && !(*a.t1_ps > 0)) config_fail(s.field("t1_ps"), "must be positive");
    s.finish();
  }
  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::Config, std::string("--config: ") + e.what());
  }
  return config_from_json(text, path);
}

std::string config_to_json(const RunConfig& c) {
  json doc;
  doc["catalog"] = c.catalog;
  doc["seed"] = c.seed;
  auto em = json::array();
  for (const auto& e : c.emitters) {
    json j;
    j["state"] = e.state.label();
    j["energy_meV"] = optional_json(e.energy_meV);
    j["lifetime_ps"] = optional_json(e.lifetime_ps);
    j["amplitude"] = e.amplitude;
    j["phase"] = e.phase;
    em.push_back(j);
  }
  doc["emitters"] = em;
  doc["reference"] = c.reference ? json(c.reference->label()) : json(nullptr);
  doc["cross_visibility"] = c.cross_visibility;
  doc["pure_dephasing_rate"] = c.pure_dephasing_rate;
  doc["shg_prompt_amplitude"] = c.shg_prompt_amplitude;
  doc["instrument"] = {{"time_fwhm_ps", c.instrument.time_fwhm_ps},
                       {"energy_fwhm_meV", c.instrument.energy_fwhm_meV}};
  doc["time_grid"] = grid_json(c.time);
  doc["energy_grid"] = grid_json(c.energy);
  doc["channel"] = c.channel ? json{{"center_meV", c.channel->center_meV},
                                    {"fwhm_meV", c.channel->fwhm_meV}}
                             : json(nullptr);
  doc["noise"] = {{"kind", noise_name(c.noise.kind)},
                  {"peak_counts", c.noise.peak_counts},
                  {"sigma", c.noise.sigma}};
  doc["fringes"] = {{"delays", grid_json(c.delays)},
                    {"x0", c.geometry.x0},
                    {"sigma_x", c.geometry.sigma_x},
                    {"k", c.geometry.k},
                    {"phi", c.geometry.phi},
                    {"amplitude", c.geometry.amplitude},
                    {"pixels", c.geometry.pixels},
                    {"channel_fwhm_meV", c.fringe_channel_fwhm_meV}};
  const auto& a = c.analysis;
  json an;
  an["irf_fwhm_ps"] = optional_json(a.irf_fwhm_ps);
  an["fix_irf"] = a.fix_irf;
  an["fit_prompt"] = a.fit_prompt;
  an["weighting"] = a.weighting == Weighting::Unit ? "unit" : "poisson";
  an["detrend"] = a.detrend == DetrendMethod::EmgResidual ? "emg_residual" : "moving_mean";
  an["moving_mean_width_ps"] = a.moving_mean_width_ps;
  an["window"] = to_string(a.window);
  an["pad_factor"] = a.pad_factor;
  an["min_prominence"] = a.min_prominence;
  an["false_alarm"] = a.false_alarm;
  an["tolerance_meV"] = a.tolerance_meV;
  an["start_after_peak_ps"] = a.start_after_peak_ps;
  auto anchors = json::array();
  for (const auto& s : a.anchors) anchors.push_back(s.label());
  an["anchors"] = anchors;
  an["include_neighbor_n"] = a.include_neighbor_n;
  an["channel_center_meV"] = optional_json(a.channel_center_meV);
  an["channel_half_width_meV"] = a.channel_half_width_meV;
  an["decay_shape"] = a.decay_shape == DecayShape::Exponential ? "exponential" : "gaussian";
  an["t1_ps"] = optional_json(a.t1_ps);
  doc["analysis"] = an;
  return doc.dump(2) + "\n";
}

StateCatalog resolve_catalog(const RunConfig& config, std::string* resolved) {
  std::string path = config.catalog;
  if (path == "embedded") {
    const char* env = std::getenv("RYDBEAT_CATALOG");
    if (env && *env) path = env;
  }
  if (resolved) *resolved = path;
  if (path == "embedded") return StateCatalog::embedded();
  const char* field = path == config.catalog ? "catalog" : "RYDBEAT_CATALOG";
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    config_fail(field, "catalog file '" + path + "' not found");
  try {
    return load_catalog(path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) config_fail(field, e.what());
    throw;
  }
}

EmitterSet build_emitters(const RunConfig& config, const StateCatalog& catalog) {
  const StateId reference = config.reference.value_or(config.emitters.front().state);
  const auto* ref = catalog.find(reference);
  const auto& first = config.emitters.front();
  const auto* first_rec = catalog.find(first.state);

  EmitterSet set;
  set.cross_visibility = config.cross_visibility;
  set.pure_dephasing_rate = config.pure_dephasing_rate;
  set.shg_prompt_amplitude = config.shg_prompt_amplitude;
  double anchor_meV = 0.0;
  for (std::size_t i = 0; i < config.emitters.size(); ++i) {
    const auto& spec = config.emitters[i];
    const std::string path = "emitters[" + std::to_string(i) + "]";
    const auto* rec = catalog.find(spec.state);
    Emitter e;
    e.state = spec.state;
    e.amplitude = spec.amplitude;
    e.phase = spec.phase;
    if (spec.lifetime_ps) e.lifetime_ps = *spec.lifetime_ps;
    else if (rec) e.lifetime_ps = rec->lifetime_ps;
    else config_fail(path + ".lifetime_ps", "state " + spec.state.label() + " is not in the catalog; give a lifetime");

    if (spec.energy_meV) {
      e.energy_meV = *spec.energy_meV;
    } else if (!rec) {
      config_fail(path + ".energy_meV", "state " + spec.state.label() + " is not in the catalog; give an energy");
    } else if (!ref) {
      config_fail("reference", "state " + reference.label() + " is not in the catalog");
    } else {
      e.energy_meV = (rec->energy_eV - ref->energy_eV) * 1e3;
      // Partners of the first state sit at the quoted split when one exists.
      if (i > 0 && first_rec) {
        if (auto split = catalog.override_for(first.state, spec.state)) {
          const double side = rec->energy_eV < first_rec->energy_eV ? -1.0 : 1.0;
          e.energy_meV = anchor_meV + side * *split;
        }
      }
    }
    if (i == 0) anchor_meV = e.energy_meV;
    set.emitters.push_back(e);
  }
  set.validate();
  return set;
}

std::optional<Channel> build_channel(const RunConfig& config) {
  if (!config.channel) return std::nullopt;
  return Channel{config.channel->center_meV, config.channel->fwhm_meV / kFwhmPerSigma};
}

LifetimeFitOptions build_lifetime_options(const RunConfig& config) {
  LifetimeFitOptions o;
  o.irf_fwhm_ps = config.analysis.irf_fwhm_ps;
  o.fix_irf = config.analysis.fix_irf;
  o.fit_prompt = config.analysis.fit_prompt;
  o.weighting = config.analysis.weighting;
  return o;
}

BeatReportOptions build_beat_options(const RunConfig& config) {
  const auto& a = config.analysis;
  BeatReportOptions o;
  o.detrend.method = a.detrend;
  o.detrend.moving_mean_width_ps = a.moving_mean_width_ps;
  o.detrend.fit = build_lifetime_options(config);
  o.window = a.window;
  o.pad_factor = a.pad_factor;
  o.peaks.min_prominence = a.min_prominence;
  o.peaks.false_alarm = a.false_alarm;
  o.tolerance_meV = a.tolerance_meV;
  o.assign.anchors = a.anchors;
  o.assign.include_neighbor_n = a.include_neighbor_n;
  o.start_after_peak_ps = a.start_after_peak_ps;
  return o;
}

}  // namespace rydbeat
