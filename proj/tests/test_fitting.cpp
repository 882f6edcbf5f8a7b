#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "rydbeat/dynamics.hpp"
#include "rydbeat/error.hpp"
#include "rydbeat/fitting.hpp"
#include "rydbeat/grid.hpp"
#include "rydbeat/noise.hpp"

using namespace rydbeat;

namespace {

std::vector<double> grid(double a, double b, double step) {
  return UniformGrid::from_range(a, b, step).values();
}

// Unit-area exponential convolved with a Gaussian, by quadrature over the
// Gaussian's support.
double emg_oracle(double t, double t0, double sigma, double tau) {
  using boost::math::quadrature::gauss_kronrod;
  const double dt = t - t0;
  const double lo = std::max(0.0, dt - 14 * sigma);
  const double hi = dt + 14 * sigma;
  if (hi <= lo) return 0.0;
  auto f = [&](double s) {
    const double z = (dt - s) / sigma;
    return std::exp(-s / tau) / tau * std::exp(-0.5 * z * z) /
           (sigma * std::sqrt(2 * std::numbers::pi));
  };
  double acc = 0.0;
  const int pieces = 16;
  for (int p = 0; p < pieces; ++p)
    acc += gauss_kronrod<double, 61>::integrate(f, lo + (hi - lo) * p / pieces,
                                                lo + (hi - lo) * (p + 1) / pieces, 8, 1e-13);
  return acc;
}

TimeTrace emg_trace(const EmgModel& m, const std::vector<double>& t) {
  TimeTrace trace;
  trace.t = t;
  for (double x : t) trace.intensity.push_back(emg_eval(m, x));
  return trace;
}

TimeTrace simulated(const char* state, double peak_counts, std::uint64_t seed) {
  const auto& rec = StateCatalog::embedded().at(StateId::parse(state));
  EmitterSet set{{{rec.id, 0.0, rec.lifetime_ps, 1.0, 0.0}}};
  auto trace = intensity_trace(set, grid(-10.0, 120.0, 0.1), std::nullopt,
                               InstrumentResponse{2.57, 0.6});
  trace.intensity = add_noise(trace.intensity, PoissonNoise{peak_counts}, seed);
  return trace;
}

}  // namespace

TEST_SUITE("fitting") {

TEST_CASE("erfcx matches exp(x^2) erfc(x)") {
  for (double x : {-3.0, -1.0, -0.1, 0.0, 0.5, 2.0, 4.9}) {
    CHECK(erfcx(x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-13));
  }
  // Large arguments: asymptotic 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4)).
  for (double x : {6.0, 20.0, 1e3}) {
    const double series = (1 - 0.5 / (x * x) + 0.75 / std::pow(x, 4) - 1.875 / std::pow(x, 6)) /
                          (x * std::sqrt(std::numbers::pi));
    CHECK(erfcx(x) == doctest::Approx(series).epsilon(std::max(1e-12, 7.0 / std::pow(x, 8))));
  }
  CHECK(erfcx(5.0 - 1e-12) == doctest::Approx(erfcx(5.0)).epsilon(1e-10));
}

TEST_CASE("EMG closed form agrees with quadrature") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> us(0.3, 3.0), ut(0.5, 25.0), ux(-3.0, 6.0);
  double worst = 0.0;
  for (int k = 0; k < 60; ++k) {
    const double sigma = us(rng), tau = ut(rng);
    const double t = sigma * ux(rng) + (k % 3) * tau;
    const EmgModel m{0.0, sigma, tau, 1.0, 0.0, 0.0};
    const double oracle = emg_oracle(t, 0.0, sigma, tau);
    worst = std::max(worst, std::abs(emg_eval(m, t) - oracle) / oracle);
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("EMG limits") {
  const EmgModel narrow{0.0, 1e-7, 3.1, 1.0, 0.0, 0.0};
  for (double t : {0.5, 2.0, 9.0})
    CHECK(emg_eval(narrow, t) == doctest::Approx(std::exp(-t / 3.1) / 3.1).epsilon(1e-9));
  const EmgModel m{0.0, 1.0, 5.0, 2.0, 0.25, 0.0};
  CHECK(emg_eval(m, -1e3) == doctest::Approx(0.25));
  CHECK(std::isfinite(emg_eval(m, -1e6)));
  CHECK(emg_eval(m, 1e4) == doctest::Approx(0.25));
  const EmgModel prompt{1.0, 0.5, 5.0, 0.0, 0.0, 3.0};
  CHECK(emg_eval(prompt, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("least squares recovers all three models from perturbed starts") {
  const auto t = grid(-10.0, 60.0, 0.1);
  const std::vector<double> truth_emg{1.0, 1.1, 4.2, 500.0, 3.0};
  std::vector<double> emg_data;
  for (double x : t)
    emg_data.push_back(emg_eval({truth_emg[0], truth_emg[1], truth_emg[2], truth_emg[3],
                                 truth_emg[4], 0.0}, x));
  auto emg_model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < t.size(); ++i)
      out[i] = emg_eval({p[0], p[1], p[2], p[3], p[4], 0.0}, t[i]);
  };

  const auto x = grid(0.0, 399.0, 1.0);
  const std::vector<double> truth_fr{1000.0, 200.0, 80.0, 0.7, 0.5, 0.3};
  std::vector<double> fr_data;
  for (double v : x)
    fr_data.push_back(fringe_eval({truth_fr[0], truth_fr[1], truth_fr[2], truth_fr[3],
                                   truth_fr[4], truth_fr[5]}, v));
  auto fr_model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i)
      out[i] = fringe_eval({p[0], p[1], p[2], p[3], p[4], p[5]}, x[i]);
  };

  const auto d = grid(0.0, 15.0, 1.0);
  const std::vector<double> truth_cd{0.9, 6.2, 0.05};
  std::vector<double> cd_data;
  for (double v : d)
    cd_data.push_back(contrast_eval({truth_cd[0], truth_cd[1], DecayShape::Exponential, truth_cd[2]}, v));
  auto cd_model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < d.size(); ++i)
      out[i] = contrast_eval({p[0], p[1], DecayShape::Exponential, p[2]}, d[i]);
  };

  struct Case {
    const char* name;
    ModelFn model;
    const std::vector<double>* data;
    std::vector<double> truth;
    double perturb;
  };
  const std::vector<Case> cases{
      {"emg", emg_model, &emg_data, truth_emg, 0.3},
      // Fringe frequency and phase need a start within the capture range.
      {"fringe", fr_model, &fr_data, truth_fr, 0.3},
      {"contrast", cd_model, &cd_data, truth_cd, 0.3},
  };
  for (const auto& c : cases) {
    for (double sign : {-1.0, 1.0}) {
      CAPTURE(c.name);
      CAPTURE(sign);
      std::vector<ParamSpec> params;
      for (std::size_t i = 0; i < c.truth.size(); ++i) {
        double f = 1.0 + sign * c.perturb;
        // Fringe frequency and phase tolerate only small offsets.
        if (std::string(c.name) == "fringe" && (i == 4)) f = 1.0 + sign * 0.002;
        if (std::string(c.name) == "fringe" && (i == 5)) f = 1.0 + sign * 0.3;
        params.push_back({"p" + std::to_string(i), c.truth[i] * f});
      }
      // Contrast is non-negative; otherwise (-C, phi + pi) is the same curve.
      if (std::string(c.name) == "fringe") params[3].lower = 0.0;
      const auto fit = least_squares(c.model, *c.data, {}, params);
      CHECK(fit.converged);
      for (std::size_t i = 0; i < c.truth.size(); ++i)
        CHECK(fit.values[i] == doctest::Approx(c.truth[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("least squares edge cases") {
  auto line = [](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p[0] + p[1] * static_cast<double>(i);
  };
  const std::vector<double> data{1.0, 3.0, 5.0, 7.0};
  const auto exact = least_squares(line, data, {}, {{"a", 1.0}, {"b", 2.0}});
  CHECK(exact.converged);
  CHECK(exact.final_cost == 0.0);
  CHECK(exact.iterations == 0);

  const std::vector<double> two{1.0, 3.0};
  try {
    least_squares(line, two, {}, {{"a", 0.0}, {"b", 0.0}});
    FAIL("expected DegenerateFit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateFit);
  }
  // A parameter that does not enter the model.
  auto flat = [](std::span<const double> p, std::span<double> out) {
    for (auto& v : out) v = p[0];
  };
  CHECK_THROWS_AS(least_squares(flat, data, {}, {{"a", 0.0}, {"unused", 1.0}}), Error);
  CHECK_THROWS_AS(least_squares(line, data, {}, {{"a", 5.0, 0.0, 1.0}, {"b", 0.0}}), Error);
  const std::vector<double> bad_sigma{1.0, 0.0, 1.0, 1.0};
  CHECK_THROWS_AS(least_squares(line, data, bad_sigma, {{"a", 0.0}, {"b", 0.0}}), Error);

  // Fixed parameters stay put; a bound is held and flagged.
  const auto fixed = least_squares(line, data, {}, {{"a", 0.5, -1e9, 1e9, true}, {"b", 1.0}});
  CHECK(fixed.values[0] == 0.5);
  CHECK(fixed.sigmas[0] == 0.0);
  const auto bounded = least_squares(line, data, {}, {{"a", 0.0, -1.0, 0.5}, {"b", 1.0}});
  CHECK(bounded.values[0] == 0.5);
  CHECK(bounded.has_flag("at_bound:a"));
  CHECK(bounded.sigma("a") == 0.0);
  CHECK(bounded.sigma("b") > 0.0);
}

TEST_CASE("lifetime fit on noise-free data") {
  const auto t = grid(-10.0, 80.0, 0.1);
  const EmgModel truth{0.4, 1.09, 5.1, 1000.0, 2.0, 0.0};
  const auto fit = fit_lifetime(emg_trace(truth, t), {2.57});
  CHECK(fit.converged);
  CHECK(fit.value("tau") == doctest::Approx(5.1).epsilon(1e-6));
  CHECK(fit.value("sigma") == doctest::Approx(1.09).epsilon(1e-6));
  CHECK(fit.value("t0") == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(fit.value("baseline") == doctest::Approx(2.0).epsilon(1e-6));
  const auto m = emg_from_fit(fit);
  CHECK(m.amp == doctest::Approx(1000.0).epsilon(1e-6));
}

TEST_CASE("lifetime fit with the IRF held and the prompt fitted") {
  const auto t = grid(-10.0, 60.0, 0.1);
  const EmgModel truth{0.0, 2.57 / kFwhmPerSigma, 3.1, 100.0, 0.0, 4.0};
  LifetimeFitOptions opts;
  opts.irf_fwhm_ps = 2.57;
  opts.fix_irf = true;
  opts.fit_prompt = true;
  const auto fit = fit_lifetime(emg_trace(truth, t), opts);
  CHECK(fit.value("sigma") == doctest::Approx(truth.sigma));
  CHECK(fit.sigma("sigma") == 0.0);
  CHECK(fit.value("tau") == doctest::Approx(3.1).epsilon(1e-5));
  CHECK(fit.value("prompt_amp") == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("lifetimes of simulated 3S and 8S traces") {
  for (const auto& [state, tau, tol] : {std::tuple{"3S", 3.1, 0.1}, std::tuple{"8S", 21.5, 2.0}}) {
    CAPTURE(state);
    LifetimeFitOptions opts;
    opts.irf_fwhm_ps = 2.57;
    opts.weighting = Weighting::Poisson;
    const auto fit = fit_lifetime(simulated(state, 1e5, 2021), opts);
    CHECK(fit.converged);
    CHECK(std::abs(fit.value("tau") - tau) <= tol);
    CHECK(fit.sigma("tau") > 0.0);
    CHECK(fit.sigma("tau") < tol);
  }
}

TEST_CASE("a trace without decay leaves the lifetime unconstrained") {
  const auto t = grid(-10.0, 60.0, 0.1);
  TimeTrace trace;
  trace.t = t;
  for (double x : t) trace.intensity.push_back(100.0 * std::exp(-0.5 * x * x / 1.2));
  try {
    const auto fit = fit_lifetime(trace, {2.57});
    CHECK_FALSE(fit.converged);
    CHECK(fit.has_flag("tau_unconstrained"));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateFit);
  }
}

TEST_CASE("lifetime fit rejects traces that do not cover the decay") {
  const auto t = grid(0.0, 20.0, 0.1);
  TimeTrace rising;
  rising.t = t;
  for (double x : t) rising.intensity.push_back(x);
  try {
    fit_lifetime(rising);
    FAIL("expected InsufficientCoverage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientCoverage);
  }
  TimeTrace tiny{{0.0, 0.1, 0.2}, {1.0, 0.5, 0.2}, {}};
  CHECK_THROWS_AS(fit_lifetime(tiny), Error);
}

TEST_CASE("reported lifetime sigma tracks the scatter over seeds") {
  const auto t = grid(-10.0, 60.0, 0.1);
  const EmgModel truth{0.0, 1.09, 5.1, 100.0, 0.0, 0.0};
  const auto clean = emg_trace(truth, t);
  std::vector<double> taus, sigmas;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto noisy = clean;
    noisy.intensity = add_noise(clean.intensity, GaussianNoise{0.3}, derive_seed(77, seed));
    const auto fit = fit_lifetime(noisy, {2.57});
    taus.push_back(fit.value("tau"));
    sigmas.push_back(fit.sigma("tau"));
  }
  double mean = 0.0, mean_sigma = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    mean += taus[i];
    mean_sigma += sigmas[i];
  }
  mean /= taus.size();
  mean_sigma /= sigmas.size();
  double var = 0.0;
  for (double v : taus) var += (v - mean) * (v - mean);
  const double spread = std::sqrt(var / (taus.size() - 1));
  CHECK(std::abs(mean - 5.1) < 3 * spread / std::sqrt(50.0) + 1e-3);
  CHECK(mean_sigma / spread > 0.7);
  CHECK(mean_sigma / spread < 1.4);
}

TEST_CASE("fringe slice fits") {
  const auto x = grid(0.0, 399.0, 1.0);
  const FringeModel truth{1000.0, 200.0, 80.0, 0.7, 0.5, 0.3};
  std::vector<double> row;
  for (double v : x) row.push_back(fringe_eval(truth, v));

  const auto exact = fit_fringe_slice(x, row);
  CHECK(exact.value("C") == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(exact.value("k") == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(exact.value("sigma") == doctest::Approx(80.0).epsilon(1e-6));
  CHECK(exact.value("phi") == doctest::Approx(0.3).epsilon(1e-6));
  CHECK_FALSE(exact.has_flag("low_significance"));

  // Scaling the counts does not change the contrast.
  std::vector<double> scaled;
  for (double v : row) scaled.push_back(v * 37.0);
  CHECK(fit_fringe_slice(x, scaled).value("C") == doctest::Approx(0.7).epsilon(1e-6));

  // 1% Gaussian noise relative to the peak.
  const auto noisy = add_noise(row, GaussianNoise{0.01 * 1000.0}, 4);
  const auto nf = fit_fringe_slice(x, noisy);
  CHECK(std::abs(nf.value("C") - 0.7) < 0.02);
  CHECK(nf.sigma("C") > 0.0);
  CHECK(nf.sigma("C") < 0.02);

  // Full contrast stays within [0, 1].
  std::vector<double> full;
  for (double v : x) full.push_back(fringe_eval({1000.0, 200.0, 80.0, 1.0, 0.5, 0.3}, v));
  const auto ff = fit_fringe_slice(x, full);
  CHECK(ff.value("C") <= 1.0);
  CHECK(ff.value("C") == doctest::Approx(1.0).epsilon(1e-6));

  // No fringes at all.
  std::vector<double> none;
  for (double v : x) none.push_back(fringe_eval({1000.0, 200.0, 80.0, 0.0, 0.5, 0.3}, v));
  const auto nn = fit_fringe_slice(x, none);
  CHECK(nn.value("C") == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(nn.has_flag("low_significance"));
  CHECK(nn.value("sigma") == doctest::Approx(80.0).epsilon(1e-6));

  CHECK_THROWS_AS(fit_fringe_slice(std::span(x).subspan(0, 8), std::span(row).subspan(0, 8)), Error);
  std::vector<double> zeros(x.size(), 0.0);
  CHECK_THROWS_AS(fit_fringe_slice(x, zeros), Error);
}

TEST_CASE("contrast decay fits") {
  const auto d = grid(0.0, 15.0, 1.0);
  std::vector<ContrastPoint> exact;
  for (double v : d) exact.push_back({v, std::exp(-v / 6.2), 0.0});
  const auto fit = fit_contrast_decay(exact);
  CHECK(fit.value("T2") == doctest::Approx(6.2).epsilon(1e-6));
  CHECK(fit.value("C0") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_FALSE(fit.has_flag("resolution_limited"));

  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<ContrastPoint> noisy;
  for (double v : d) {
    const double c = std::exp(-v / 6.2);
    noisy.push_back({v, c * (1.0 + 0.05 * noise(rng)), 0.05 * c});
  }
  const auto nf = fit_contrast_decay(noisy);
  CHECK(std::abs(nf.value("T2") - 6.2) < 0.6);
  CHECK(nf.sigma("T2") > 0.0);

  std::vector<ContrastPoint> gauss;
  for (double v : d) gauss.push_back({v, 0.8 * std::exp(-(v / 7.0) * (v / 7.0)) + 0.02, 0.0});
  const auto gf = fit_contrast_decay(gauss, DecayShape::Gaussian);
  CHECK(gf.value("T2") == doctest::Approx(7.0).epsilon(1e-6));
  CHECK(gf.value("floor") == doctest::Approx(0.02).epsilon(1e-6));
  CHECK(gf.model == "contrast_decay_gaussian");

  std::vector<ContrastPoint> flat;
  for (double v : d) flat.push_back({v, 0.9, 0.01});
  try {
    fit_contrast_decay(flat);
    FAIL("expected InsufficientDecay");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientDecay);
  }

  std::vector<ContrastPoint> fast;
  for (double v : d) fast.push_back({v, std::exp(-v / 3.0), 0.0});
  const auto ff = fit_contrast_decay(fast);
  CHECK(ff.value("T2") == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(ff.has_flag("resolution_limited"));

  CHECK_THROWS_AS(fit_contrast_decay(std::span(exact).subspan(0, 3)), Error);
}

TEST_CASE("T2 bound validation") {
  const auto ok = validate_t2_bound(6.2, 0.2, 3.1, 0.1);
  CHECK_FALSE(ok.violation);
  CHECK(ok.bound_ps == doctest::Approx(6.2));
  CHECK(ok.pure_dephasing_rate == doctest::Approx(0.0));

  const auto bad = validate_t2_bound(9.0, 0.2, 3.1, 0.1);
  CHECK(bad.violation);

  // Within twice the combined uncertainty is not a violation.
  CHECK_FALSE(validate_t2_bound(6.6, 0.2, 3.1, 0.0).violation);
  CHECK(validate_t2_bound(6.7, 0.2, 3.1, 0.0).violation);

  const auto dephased = validate_t2_bound(12.0, 0.5, 20.0, 1.5);
  CHECK_FALSE(dephased.violation);
  CHECK(dephased.pure_dephasing_rate == doctest::Approx(1.0 / 12.0 - 1.0 / 40.0));
  CHECK(dephased.pure_dephasing_rate == doctest::Approx(0.0583).epsilon(1e-3));

  CHECK_THROWS_AS(validate_t2_bound(0.0, 0.1, 3.1), Error);
  CHECK_THROWS_AS(validate_t2_bound(6.0, 0.1, -1.0), Error);
}

}  // TEST_SUITE
