#include "rydbeat/reproduce.hpp"

#include <algorithm>
#include <cmath>

#include "rydbeat/error.hpp"
#include "rydbeat/coherence.hpp"
#include "rydbeat/grid.hpp"
#include "rydbeat/noise.hpp"

namespace rydbeat {

namespace {

StateId id(const char* label) { return StateId::parse(label); }

std::vector<double> noisy(std::span<const double> signal, double peak_counts,
                          std::uint64_t seed) {
  return add_noise(signal, PoissonNoise{peak_counts}, seed);
}

bool same_pair(const StateId& a, const StateId& b, const BeatCandidate& c) {
  return (c.a == a && c.b == b) || (c.a == b && c.b == a);
}

}  // namespace

std::vector<LifetimeCheck> reproduce_lifetimes(const StateCatalog& catalog,
                                               const ReproduceOptions& options) {
  const auto grid = UniformGrid::from_range(options.t_start_ps, options.t_stop_ps, options.dt_ps);
  const auto t = grid.values();
  InstrumentResponse irf;
  irf.time_fwhm_ps = options.irf_fwhm_ps;

  std::vector<LifetimeCheck> rows;
  std::uint64_t stream = 0;
  for (const auto& rec : catalog.records()) {
    ++stream;
    if (rec.id.color != SeriesColor::Yellow) continue;
    if (rec.id.series != Series::S && rec.id.series != Series::D) continue;
    if (!(rec.lifetime_ps > 0)) continue;

    EmitterSet set;
    set.emitters.push_back({rec.id, 0.0, rec.lifetime_ps, 1.0, 0.0});
    auto trace = intensity_trace(set, t, std::nullopt, irf);
    trace.intensity = noisy(trace.intensity, options.peak_counts, derive_seed(options.seed, stream));

    LifetimeCheck row;
    row.state = rec.id;
    row.reference_ps = rec.lifetime_ps;
    row.reference_err_ps = rec.lifetime_err_ps;
    row.tolerance_ps = std::max(rec.lifetime_err_ps, 0.05 * rec.lifetime_ps);
    row.source = rec.source == Source::Measured ? "measured" : "literature";
    LifetimeFitOptions fit_options;
    fit_options.irf_fwhm_ps = options.irf_fwhm_ps;
    try {
      const auto fit = fit_lifetime(trace, fit_options);
      row.recovered_ps = fit.value("tau");
      row.recovered_sigma_ps = fit.sigma("tau");
      row.flags = fit.flags;
      row.pass = fit.converged && std::abs(row.recovered_ps - row.reference_ps) <= row.tolerance_ps;
    } catch (const Error& e) {
      row.flags.push_back(std::string(to_string(e.code())));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::vector<BeatScenario>& beat_scenarios() {
  static const std::vector<BeatScenario> rows = [] {
    std::vector<BeatScenario> v;
    v.push_back({"4S", id("4S"), 0.30, 0.01, id("4D2"),
                 {{id("4D2"), 0.30, 1.0}, {id("4D1"), 0.21, 0.1}}});
    v.push_back({"4D", id("4D"), 0.30, 0.02, id("4S"),
                 {{id("4S"), 0.30, 1.0}, {id("4F"), 0.12, 0.1, -1}, {id("4D1"), 0.07, 0.1}}});
    v.push_back({"5S", id("5S"), 0.14, 0.015, id("5D2"),
                 {{id("5D2"), 0.14, 0.6},
                  {id("6D"), 0.42, 0.3},
                  {id("6S"), 0.31, 0.3},
                  {id("5D1"), 0.09, 0.3}}});
    v.push_back({"5D", id("5D"), 0.13, 0.02, id("5S"),
                 {{id("5S"), 0.13, 0.6}, {id("5D1"), 0.04, 0.3}}});
    v.push_back({"6S", id("6S"), 0.095, 0.01, id("6D"),
                 {{id("6D"), 0.095, 0.6}, {id("7D"), 0.26, 0.3}, {id("7S"), 0.175, 0.3}}});
    v.push_back({"7S", id("7S"), 0.065, 0.01, id("7D"),
                 {{id("7D"), 0.065, 0.6},
                  {id("6S"), 0.184, 0.3},
                  {id("8D"), 0.173, 0.3},
                  {id("8S"), 0.11, 0.3}}});
    v.push_back({"8S", id("8S"), 0.06, 0.01, id("8D"),
                 {{id("8D"), 0.06, 0.6},
                  {id("7S"), 0.115, 0.3},
                  {id("9S"), 0.08, 0.3},
                  {id("7D"), 0.04, 0.3}}});
    return v;
  }();
  return rows;
}

namespace {

// A D-series label without sublevel stands for the upper sublevel.
const StateRecord* resolve(const StateCatalog& catalog, StateId s) {
  if (const auto* rec = catalog.find(s)) return rec;
  if (s.series == Series::D && s.sublevel == 0) {
    s.sublevel = 2;
    return catalog.find(s);
  }
  return nullptr;
}

}  // namespace

EmitterSet scenario_emitters(const BeatScenario& scenario, const StateCatalog& catalog) {
  const auto* anchor = resolve(catalog, scenario.anchor);
  if (!anchor) fail(ErrorCode::NotFound, "state " + scenario.anchor.label() + " not in catalog");
  EmitterSet set;
  set.emitters.push_back({anchor->id, 0.0, anchor->lifetime_ps, 1.0, 0.0});
  for (const auto& p : scenario.partners) {
    const auto* rec = resolve(catalog, p.state);
    double side = rec && rec->energy_eV < anchor->energy_eV ? -1.0 : 1.0;
    if (p.side != 0) side = p.side;
    Emitter e;
    e.state = rec ? rec->id : p.state;
    e.energy_meV = side * thz_to_mev(p.nu_thz);
    e.lifetime_ps = rec ? rec->lifetime_ps : anchor->lifetime_ps;
    e.amplitude = p.amplitude;
    set.emitters.push_back(e);
  }
  return set;
}

std::vector<BeatCheck> reproduce_beats(const StateCatalog& catalog,
                                       const ReproduceOptions& options) {
  const auto grid = UniformGrid::from_range(options.t_start_ps, options.t_stop_ps, options.dt_ps);
  const auto t = grid.values();
  InstrumentResponse irf;
  irf.time_fwhm_ps = options.irf_fwhm_ps;

  std::vector<BeatCheck> rows;
  std::uint64_t stream = 100;
  for (const auto& sc : beat_scenarios()) {
    ++stream;
    BeatCheck row;
    row.trace = sc.trace;
    row.reference_thz = sc.major_thz;
    row.reference_err_thz = sc.major_err_thz;
    const auto* anchor = resolve(catalog, sc.anchor);
    const auto* partner = resolve(catalog, sc.major_partner);
    const StateId a = anchor ? anchor->id : sc.anchor;
    const StateId b = partner ? partner->id : sc.major_partner;
    row.reference_pair = a.label() + "-" + b.label();

    try {
      const auto set = scenario_emitters(sc, catalog);
      auto trace = intensity_trace(set, t, std::nullopt, irf);
      trace.intensity = noisy(trace.intensity, options.peak_counts, derive_seed(options.seed, stream));
      BeatReportOptions ro;
      ro.detrend.fit.irf_fwhm_ps = options.irf_fwhm_ps;
      ro.detrend.fit.fix_irf = true;
      ro.start_after_peak_ps = options.irf_fwhm_ps;
      ro.assign.anchors = {sc.anchor};
      const auto report = beat_report(trace, catalog, ro);
      for (const auto& r : report.rows) {
        if (r.peak.rank != PeakRank::Major) continue;
        row.recovered_thz = r.peak.nu_thz;
        row.recovered_err_thz = r.peak.nu_err_thz;
        if (!r.candidates.empty()) row.recovered_pair = r.candidates.front().label();
        row.pass = std::abs(r.peak.nu_thz - sc.major_thz) <= sc.major_err_thz &&
                   !r.candidates.empty() && same_pair(a, b, r.candidates.front());
      }
    } catch (const Error& e) {
      row.recovered_pair = std::string("error: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::vector<CoherenceScenario>& coherence_scenarios() {
  static const std::vector<CoherenceScenario> rows = {
      {"3S low power", id("3S"), 3.1, 0.0, 5.8, 6.6},
      {"7S high power", id("7S"), 20.0, 0.0583, 11.0, 13.0},
  };
  return rows;
}

std::vector<FringeImage> scenario_fringe_stack(const CoherenceScenario& scenario,
                                               const ReproduceOptions& options) {
  EmitterSet set;
  set.emitters.push_back({scenario.state, 0.0, scenario.t1_ps, 1.0, 0.0});
  set.pure_dephasing_rate = scenario.pure_dephasing_rate;
  const auto e = UniformGrid::from_range(-0.6, 0.6, 0.1).values();
  const auto delays = UniformGrid::from_range(options.delay_start_ps, options.delay_stop_ps,
                                              options.delay_step_ps);
  FringeGeometry geometry;
  std::vector<FringeImage> stack;
  const std::uint64_t base = derive_seed(options.seed, 1000 + scenario.state.n);
  for (std::size_t d = 0; d < delays.size; ++d) {
    auto img = fringe_image(set, delays[d], geometry, e, 0.6);
    if (options.fringe_peak_counts > 0) {
      // Noise is drawn over the whole image so all columns share one count scale.
      std::vector<double> flat;
      flat.reserve(img.x.size() * img.e.size());
      for (const auto& row : img.intensity) flat.insert(flat.end(), row.begin(), row.end());
      const auto n = noisy(flat, options.fringe_peak_counts, derive_seed(base, d));
      for (std::size_t i = 0; i < img.x.size(); ++i)
        for (std::size_t j = 0; j < img.e.size(); ++j)
          img.intensity[i][j] = n[i * img.e.size() + j];
    }
    stack.push_back(std::move(img));
  }
  return stack;
}

std::vector<CoherenceCheck> reproduce_coherence(const ReproduceOptions& options) {
  std::vector<CoherenceCheck> rows;
  for (const auto& sc : coherence_scenarios()) {
    CoherenceCheck row;
    row.label = sc.label;
    row.t1_ps = sc.t1_ps;
    row.pure_dephasing_rate = sc.pure_dephasing_rate;
    row.expected_t2_ps = 1.0 / (0.5 / sc.t1_ps + sc.pure_dephasing_rate);
    row.t2_low_ps = sc.t2_low_ps;
    row.t2_high_ps = sc.t2_high_ps;
    try {
      const auto stack = scenario_fringe_stack(sc, options);
      CoherenceOptions co;
      co.channel_center_meV = 0.0;
      const auto result = analyze_fringe_stack(stack, co);
      const auto& ch = result.channels.front();
      if (!ch.decay) {
        row.error = ch.error;
      } else {
        row.recovered_ps = ch.decay->value("T2");
        row.recovered_sigma_ps = ch.decay->sigma("T2");
        row.flags = ch.decay->flags;
        const auto bound = validate_t2_bound(*ch.decay, sc.t1_ps);
        row.bound_ok = !bound.violation;
        row.pass = row.bound_ok && row.recovered_ps >= sc.t2_low_ps &&
                   row.recovered_ps <= sc.t2_high_ps;
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rydbeat
