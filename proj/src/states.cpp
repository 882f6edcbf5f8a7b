#include "rydbeat/states.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rydbeat/error.hpp"

namespace rydbeat {

using json = nlohmann::json;

char series_letter(Series s) noexcept {
  switch (s) {
    case Series::S: return 'S';
    case Series::P: return 'P';
    case Series::D: return 'D';
    case Series::F: return 'F';
  }
  return '?';
}

Series parse_series(std::string_view text) {
  if (text.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(text[0]))) {
      case 'S': return Series::S;
      case 'P': return Series::P;
      case 'D': return Series::D;
      case 'F': return Series::F;
      default: break;
    }
  }
  fail(ErrorCode::InvalidInput, "unknown series '" + std::string(text) + "'");
}

StateId StateId::parse(std::string_view label) {
  StateId id;
  std::size_t pos = 0;
  while (pos < label.size() && std::isdigit(static_cast<unsigned char>(label[pos])))
    ++pos;
  if (pos == 0 || pos == label.size())
    fail(ErrorCode::InvalidInput, "malformed state label '" + std::string(label) + "'");
  id.n = std::stoi(std::string(label.substr(0, pos)));
  id.series = parse_series(label.substr(pos, 1));
  ++pos;
  if (pos < label.size() && std::isdigit(static_cast<unsigned char>(label[pos]))) {
    id.sublevel = label[pos] - '0';
    ++pos;
  }
  if (pos < label.size() && (label[pos] == 'g' || label[pos] == 'G')) {
    id.color = SeriesColor::Green;
    ++pos;
  }
  if (pos != label.size() || id.n < 1 || id.sublevel > 2 ||
      (id.sublevel != 0 && id.series != Series::D))
    fail(ErrorCode::InvalidInput, "malformed state label '" + std::string(label) + "'");
  return id;
}

std::string StateId::label() const {
  std::string out = std::to_string(n);
  out += series_letter(series);
  if (sublevel != 0) out += static_cast<char>('0' + sublevel);
  if (color == SeriesColor::Green) out += 'g';
  return out;
}

namespace {

bool same_pair(const SplitOverride& o, const StateId& a, const StateId& b) {
  return (o.a == a && o.b == b) || (o.a == b && o.b == a);
}

void validate(const std::vector<StateRecord>& records,
              const std::vector<SplitOverride>& overrides) {
  std::set<StateId> seen;
  for (const auto& r : records) {
    const auto label = r.id.label();
    if (!seen.insert(r.id).second)
      fail(ErrorCode::InvalidInput, "duplicate state " + label);
    if (!(r.energy_eV > 0) || !(r.lifetime_ps > 0) || !(r.hbar_over_gamma_ps > 0))
      fail(ErrorCode::InvalidInput,
           "state " + label + ": energy, lifetime and hbar/Gamma must be positive");
    if (r.lifetime_err_ps < 0 || r.hbar_over_gamma_err_ps < 0)
      fail(ErrorCode::InvalidInput, "state " + label + ": negative uncertainty");
    if (r.id.sublevel != 0 && r.id.series != Series::D)
      fail(ErrorCode::InvalidInput, "state " + label + ": only D states carry sublevels");
  }
  for (const auto& a : records) {
    for (const auto& b : records) {
      if (a.id.series == b.id.series && a.id.color == b.id.color &&
          a.id.n < b.id.n && !(a.energy_eV < b.energy_eV))
        fail(ErrorCode::InvalidInput, "energies of " + a.id.label() + " and " +
                                          b.id.label() + " do not increase with n");
    }
  }
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    if (!(overrides[i].split_meV >= 0))
      fail(ErrorCode::InvalidInput, "negative split override");
    for (std::size_t j = 0; j < i; ++j)
      if (same_pair(overrides[j], overrides[i].a, overrides[i].b))
        fail(ErrorCode::InvalidInput, "duplicate split override " +
                                          overrides[i].a.label() + "-" +
                                          overrides[i].b.label());
  }
}

StateRecord row(const char* label, double e, double hg, double hg_err,
                double life, double life_err, Source src) {
  return {StateId::parse(label), e, hg, hg_err, life, life_err, src};
}

SplitOverride ov(const char* a, const char* b, double split) {
  return {StateId::parse(a), StateId::parse(b), split};
}

StateCatalog build_embedded() {
  constexpr auto M = Source::Measured;
  constexpr auto L = Source::Literature;
  std::vector<StateRecord> records{
      row("1Sg", 2.15425, 0.75, 0.1, 0.74, 0.1, M),
      row("2S", 2.13763, 0.66, 0.04, 0.7, 0.12, M),
      row("3S", 2.16039, 2.85, 0.02, 3.1, 0.1, M),
      row("4S", 2.16554, 5.0, 0.05, 5.1, 0.2, M),
      row("5S", 2.16786, 11.02, 0.05, 11.4, 1.2, L),
      row("6S", 2.16922, 19.37, 0.29, 19.0, 1.5, L),
      row("7S", 2.17006, 20.57, 0.16, 20.0, 1.5, L),
      row("8S", 2.17053, 19.37, 0.31, 21.5, 2.0, L),
      row("9S", 2.17086, 18.81, 0.4, 22.0, 2.5, L),
      row("2P", 2.14732, 0.33, 0.06, 0.48, 0.1, M),
      row("3D1", 2.16288, 2.5, 0.3, 3.2, 0.2, M),
      row("3D2", 2.16324, 2.4, 0.25, 3.2, 0.2, M),
      row("4D1", 2.16642, 3.0, 0.27, 5.7, 0.5, M),
      row("4D2", 2.16667, 1.8, 0.1, 5.7, 0.5, M),
      row("5D1", 2.16826, 3.5, 0.9, 10.5, 0.9, M),
      row("5D2", 2.16839, 5.98, 0.02, 10.5, 0.9, L),
      row("6D", 2.16945, 9.4, 0.05, 17.5, 1.2, L),
      row("7D", 2.17019, 11.02, 0.14, 19.0, 1.5, L),
      row("8D", 2.17064, 12.91, 0.16, 22.0, 2.0, L),
      row("9D", 2.17094, 17.32, 0.28, 23.0, 2.5, L),
  };
  // Quoted beat partners and their splits in meV. 7S-8S is listed twice in
  // the source table (0.47 and 0.48); the 7S-row value is kept.
  std::vector<SplitOverride> overrides{
      ov("4S", "4D2", 1.21), ov("4S", "4D1", 0.93), ov("4D2", "4F", 0.50),
      ov("4D2", "4D1", 0.29), ov("4D1", "4F", 0.21), ov("5S", "5D2", 0.56),
      ov("5S", "6D", 1.73),  ov("5S", "6S", 1.28),  ov("5S", "5D1", 0.43),
      ov("5D2", "5D1", 0.13), ov("6S", "6D", 0.42), ov("6S", "7D", 1.06),
      ov("6S", "7S", 0.76),  ov("7S", "7D", 0.30),  ov("7S", "8D", 0.72),
      ov("7S", "8S", 0.47),  ov("8S", "8D", 0.23),  ov("8S", "9S", 0.33),
      ov("8S", "7D", 0.17),
  };
  return StateCatalog(std::move(records), std::move(overrides));
}

void require_finite_nonnegative(double v, const char* what) {
  if (!std::isfinite(v) || v < 0)
    fail(ErrorCode::InvalidInput, std::string(what) + " must be finite and >= 0");
}

}  // namespace

StateCatalog::StateCatalog(std::vector<StateRecord> records,
                           std::vector<SplitOverride> overrides)
    : records_(std::move(records)), overrides_(std::move(overrides)) {
  validate(records_, overrides_);
}

const StateCatalog& StateCatalog::embedded() {
  static const StateCatalog catalog = build_embedded();
  return catalog;
}

const StateRecord* StateCatalog::find(const StateId& id) const noexcept {
  auto it = std::find_if(records_.begin(), records_.end(),
                         [&](const StateRecord& r) { return r.id == id; });
  return it == records_.end() ? nullptr : &*it;
}

const StateRecord& StateCatalog::at(const StateId& id) const {
  if (const auto* r = find(id)) return *r;
  fail(ErrorCode::NotFound, "state " + id.label() + " not in catalog");
}

std::optional<double> StateCatalog::override_for(const StateId& a,
                                                 const StateId& b) const noexcept {
  for (const auto& o : overrides_)
    if (same_pair(o, a, b)) return o.split_meV;
  return std::nullopt;
}

std::vector<StateId> StateCatalog::known_states() const {
  std::set<StateId> ids;
  for (const auto& r : records_) ids.insert(r.id);
  for (const auto& o : overrides_) {
    ids.insert(o.a);
    ids.insert(o.b);
  }
  return {ids.begin(), ids.end()};
}

bool StateCatalog::knows(const StateId& id) const noexcept {
  if (find(id)) return true;
  return std::any_of(overrides_.begin(), overrides_.end(),
                     [&](const SplitOverride& o) { return o.a == id || o.b == id; });
}

std::string catalog_to_json(const StateCatalog& catalog) {
  json states = json::array();
  for (const auto& r : catalog.records()) {
    states.push_back({
        {"label", r.id.label()},
        {"n", r.id.n},
        {"series", std::string(1, series_letter(r.id.series))},
        {"sublevel", r.id.sublevel},
        {"energy_eV", r.energy_eV},
        {"hbar_over_gamma_ps", r.hbar_over_gamma_ps},
        {"hbar_over_gamma_err_ps", r.hbar_over_gamma_err_ps},
        {"lifetime_ps", r.lifetime_ps},
        {"lifetime_err_ps", r.lifetime_err_ps},
        {"source", r.source == Source::Measured ? "measured" : "literature"},
    });
  }
  json overrides = json::array();
  for (const auto& o : catalog.overrides())
    overrides.push_back({{"a", o.a.label()}, {"b", o.b.label()}, {"split_meV", o.split_meV}});
  json doc = {{"states", states}, {"split_overrides", overrides}};
  return doc.dump(2);
}

StateCatalog catalog_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("catalog JSON: ") + e.what());
  }
  const json* states = &doc;
  const json* overrides = nullptr;
  if (doc.is_object()) {
    if (!doc.contains("states"))
      fail(ErrorCode::Parse, "catalog JSON: missing 'states' array");
    states = &doc["states"];
    if (doc.contains("split_overrides")) overrides = &doc["split_overrides"];
  }
  if (!states->is_array()) fail(ErrorCode::Parse, "catalog JSON: states must be an array");

  std::vector<StateRecord> records;
  std::size_t index = 0;
  for (const auto& item : *states) {
    const std::string where = "catalog JSON: state #" + std::to_string(index++);
    try {
      StateRecord r;
      r.id = StateId::parse(item.at("label").get<std::string>());
      if (item.contains("n") && item.at("n").get<int>() != r.id.n)
        fail(ErrorCode::Parse, where + ": 'n' disagrees with label");
      if (item.contains("series") &&
          parse_series(item.at("series").get<std::string>()) != r.id.series)
        fail(ErrorCode::Parse, where + ": 'series' disagrees with label");
      if (item.contains("sublevel") && item.at("sublevel").get<int>() != r.id.sublevel)
        fail(ErrorCode::Parse, where + ": 'sublevel' disagrees with label");
      r.energy_eV = item.at("energy_eV").get<double>();
      r.hbar_over_gamma_ps = item.at("hbar_over_gamma_ps").get<double>();
      r.hbar_over_gamma_err_ps = item.value("hbar_over_gamma_err_ps", 0.0);
      r.lifetime_ps = item.at("lifetime_ps").get<double>();
      r.lifetime_err_ps = item.value("lifetime_err_ps", 0.0);
      const auto src = item.value("source", std::string("measured"));
      if (src == "measured") r.source = Source::Measured;
      else if (src == "literature") r.source = Source::Literature;
      else fail(ErrorCode::Parse, where + ": unknown source '" + src + "'");
      records.push_back(r);
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, where + ": " + e.what());
    }
  }
  std::vector<SplitOverride> splits;
  if (overrides) {
    if (!overrides->is_array())
      fail(ErrorCode::Parse, "catalog JSON: split_overrides must be an array");
    for (const auto& item : *overrides) {
      try {
        splits.push_back({StateId::parse(item.at("a").get<std::string>()),
                          StateId::parse(item.at("b").get<std::string>()),
                          item.at("split_meV").get<double>()});
      } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("catalog JSON: split override: ") + e.what());
      }
    }
  }
  return StateCatalog(std::move(records), std::move(splits));
}

StateCatalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open catalog file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return catalog_from_json(buffer.str());
}

double thz_to_mev(double nu_thz) {
  require_finite_nonnegative(nu_thz, "frequency");
  return phys::kPlanck * nu_thz;
}

double mev_to_thz(double e_meV) {
  require_finite_nonnegative(e_meV, "energy");
  return e_meV / phys::kPlanck;
}

double inverse_linewidth(double gamma_meV) {
  if (!(gamma_meV > 0) || !std::isfinite(gamma_meV))
    fail(ErrorCode::InvalidInput, "linewidth must be positive");
  return phys::kHbar / gamma_meV;
}

SplitResult energy_split(const StateId& a, const StateId& b,
                         const StateCatalog& catalog) {
  SplitResult out;
  const auto* ra = catalog.find(a);
  const auto* rb = catalog.find(b);
  if (ra && rb) out.table_meV = std::abs(ra->energy_eV - rb->energy_eV) * 1e3;
  if (a == b && ra) {
    out.split_meV = 0.0;
    return out;
  }
  if (auto o = catalog.override_for(a, b)) {
    out.split_meV = *o;
    out.overridden = true;
    return out;
  }
  if (!ra) fail(ErrorCode::NotFound, "state " + a.label() + " not in catalog");
  if (!rb) fail(ErrorCode::NotFound, "state " + b.label() + " not in catalog");
  out.split_meV = *out.table_meV;
  return out;
}

std::map<Series, double> RydbergModel::default_defects() {
  return {{Series::S, 0.56}, {Series::D, 0.08}};
}

double calibrate_lifetime_scale(const StateCatalog& catalog, Series series,
                                double defect, const CalibrationOptions& opts) {
  double num = 0.0;
  double den = 0.0;
  int count = 0;
  for (const auto& r : catalog.records()) {
    if (r.id.series != series || r.id.color != SeriesColor::Yellow) continue;
    if (r.id.n < opts.n_min || r.id.n > opts.n_max) continue;
    const double x = std::pow(r.id.n - defect, 3);
    const double w = (opts.weighted && r.lifetime_err_ps > 0)
                         ? 1.0 / (r.lifetime_err_ps * r.lifetime_err_ps)
                         : 1.0;
    num += w * r.lifetime_ps * x;
    den += w * x * x;
    ++count;
  }
  if (count == 0)
    fail(ErrorCode::InsufficientData,
         std::string("no ") + series_letter(series) + " lifetimes in calibration range");
  return num / den;
}

RydbergModel calibrate_model(const StateCatalog& catalog,
                             const CalibrationOptions& opts) {
  if (opts.plateau_n < 2) fail(ErrorCode::InvalidInput, "plateau_n must be >= 2");
  RydbergModel model;
  model.defects = RydbergModel::default_defects();
  model.plateau_n = opts.plateau_n;
  for (const auto& [series, defect] : model.defects) {
    model.lifetime_scale[series] = calibrate_lifetime_scale(catalog, series, defect, opts);
    double sum = 0.0;
    int count = 0;
    for (const auto& r : catalog.records()) {
      if (r.id.series == series && r.id.color == SeriesColor::Yellow &&
          r.id.n >= opts.plateau_n && r.id.n <= opts.plateau_n_max) {
        sum += r.lifetime_ps;
        ++count;
      }
    }
    if (count > 0) model.plateau_lifetime[series] = sum / count;
  }
  const auto fit = fit_rydberg_energies(catalog, Series::S, 3, 9, model.defects[Series::S]);
  model.gap_energy_eV = fit.gap_energy_eV;
  model.rydberg_energy_meV = fit.rydberg_energy_meV;
  return model;
}

double predicted_lifetime(const StateId& id, const RydbergModel& model) {
  const auto defect = model.defects.find(id.series);
  const auto scale = model.lifetime_scale.find(id.series);
  if (defect == model.defects.end() || scale == model.lifetime_scale.end())
    fail(ErrorCode::NotFound,
         std::string("series ") + series_letter(id.series) + " absent from model");
  if (id.n >= model.plateau_n) {
    const auto plateau = model.plateau_lifetime.find(id.series);
    if (plateau == model.plateau_lifetime.end())
      fail(ErrorCode::NotFound,
           std::string("no plateau lifetime for series ") + series_letter(id.series));
    return plateau->second;
  }
  return scale->second * std::pow(id.n - defect->second, 3);
}

RydbergEnergyFit fit_rydberg_energies(const StateCatalog& catalog,
                                      Series series, int n_min, int n_max,
                                      double defect) {
  // Linear in (E_g, Ry*): E = E_g - Ry* x with x = 1/(n - delta)^2, in meV.
  std::vector<const StateRecord*> pts;
  for (const auto& r : catalog.records())
    if (r.id.series == series && r.id.color == SeriesColor::Yellow &&
        r.id.n >= n_min && r.id.n <= n_max)
      pts.push_back(&r);
  if (pts.size() < 3)
    fail(ErrorCode::InsufficientData, "need at least 3 states to fit Rydberg energies");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(pts.size());
  for (const auto* r : pts) {
    const double x = 1.0 / std::pow(r->id.n - defect, 2);
    const double y = r->energy_eV * 1e3;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = m * sxx - sx * sx;
  if (std::abs(det) < 1e-300)
    fail(ErrorCode::InsufficientData, "degenerate quantum numbers in Rydberg fit");
  const double slope = (m * sxy - sx * sy) / det;
  const double gap_meV = (sy - slope * sx) / m;

  RydbergEnergyFit fit;
  fit.gap_energy_eV = gap_meV * 1e-3;
  fit.rydberg_energy_meV = -slope;
  for (const auto* r : pts) {
    const double model = gap_meV + slope / std::pow(r->id.n - defect, 2);
    fit.residuals_meV.emplace_back(r->id, r->energy_eV * 1e3 - model);
  }
  return fit;
}

std::vector<LinewidthCheckRow> check_linewidth_consistency(
    const StateCatalog& catalog, double k_sigma) {
  std::vector<LinewidthCheckRow> rows;
  for (const auto& r : catalog.records()) {
    if (r.id.color != SeriesColor::Yellow) continue;
    const bool s_state = r.id.series == Series::S && r.id.n >= 2 && r.id.n <= 9;
    const bool d_state = r.id.series == Series::D && r.id.n >= 4 && r.id.n <= 6;
    if (!s_state && !d_state) continue;
    LinewidthCheckRow row;
    row.id = r.id;
    row.lifetime_ps = r.lifetime_ps;
    row.hbar_over_gamma_ps = r.hbar_over_gamma_ps;
    row.difference_ps = r.lifetime_ps - r.hbar_over_gamma_ps;
    row.combined_err_ps = r.lifetime_err_ps + r.hbar_over_gamma_err_ps;
    if (s_state) {
      row.expectation = "match";
      row.pass = std::abs(row.difference_ps) <= k_sigma * row.combined_err_ps;
    } else {
      row.expectation = "exceeds";
      row.pass = row.difference_ps > 0;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rydbeat
