#include "rydbeat/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "rydbeat/error.hpp"
#include "rydbeat/grid.hpp"

namespace rydbeat {

double erfcx(double x) {
  if (x < 0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 5.0) return std::exp(x * x) * std::erfc(x);
  // Continued fraction of erfc, evaluated backwards.
  double f = x;
  for (int k = 60; k >= 1; --k) f = x + 0.5 * k / f;
  return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

double emg_eval(const EmgModel& m, double t) {
  const double dt = t - m.t0;
  const double z = dt / m.sigma;
  const double u = (m.sigma / m.tau - z) / std::numbers::sqrt2;
  double decay;
  if (u < 0) {
    const double r = m.sigma / m.tau;
    decay = std::exp(0.5 * r * r - dt / m.tau) * std::erfc(u);
  } else {
    decay = std::exp(-0.5 * z * z) * erfcx(u);
  }
  return m.amp * decay / (2.0 * m.tau) + m.prompt_amp * std::exp(-0.5 * z * z) +
         m.baseline;
}

double fringe_eval(const FringeModel& m, double x) {
  const double d = (x - m.x0) / m.sigma;
  return m.A * std::exp(-0.5 * d * d) * 0.5 * (m.C * std::cos(m.k * x + m.phi) + 1.0);
}

double contrast_eval(const ContrastDecayModel& m, double delay_ps) {
  const double s = std::abs(delay_ps) / m.T2;
  const double decay = m.shape == DecayShape::Exponential ? std::exp(-s) : std::exp(-s * s);
  return m.C0 * decay + m.floor;
}

// ---------------------------------------------------------------------------
// Lifetime

namespace {

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Decay time from a straight-line fit of log(y - baseline) on the tail.
double tail_decay_time(std::span<const double> t, std::span<const double> y,
                       std::size_t peak, double baseline, double start_t) {
  const double top = y[peak] - baseline;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = peak; i < t.size(); ++i) {
    if (t[i] < start_t) continue;
    const double v = y[i] - baseline;
    if (v < 0.1 * top) break;
    const double ly = std::log(v);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++count;
  }
  if (count < 3) return 1.0;
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  if (!(slope < 0)) return 1.0;
  return std::clamp(-1.0 / slope, 0.05, 1e3);
}

}  // namespace

FitResult fit_lifetime(const TimeTrace& trace, const LifetimeFitOptions& options) {
  const auto& t = trace.t;
  const auto& y = trace.intensity;
  if (t.size() != y.size()) fail(ErrorCode::InvalidInput, "trace time/intensity size mismatch");
  if (t.size() < 8) fail(ErrorCode::InsufficientData, "trace too short for a lifetime fit");
  const double dt = uniform_step(t);
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (static_cast<double>(peak) >= 0.8 * static_cast<double>(t.size() - 1))
    fail(ErrorCode::InsufficientCoverage,
         "trace maximum lies in the last 20% of the window; decay not covered");

  const std::size_t edge = std::max<std::size_t>(3, t.size() / 20);
  const double head = mean_of(std::span(y).subspan(0, std::min(edge, peak + 1)));
  const double tail = mean_of(std::span(y).subspan(y.size() - edge));
  const double baseline0 = std::max(0.0, std::min(head, tail));

  const double sigma0 = options.irf_fwhm_ps ? *options.irf_fwhm_ps / kFwhmPerSigma : 1.0;
  if (!(sigma0 > 0)) fail(ErrorCode::InvalidInput, "IRF hint must be positive");
  const double tau0 = tail_decay_time(t, y, peak, baseline0, t[peak] + 1.5 * sigma0);
  double area = 0.0;
  for (double v : y) area += (v - baseline0) * dt;
  area = std::max(area, 1e-12);

  const double span = t.back() - t.front();
  std::vector<ParamSpec> params{
      {"t0", std::clamp(t[peak] - 0.5 * sigma0, t.front(), t.back()), t.front() - 0.5 * span,
       t.back()},
      // Widths well below the sampling step are not resolved by the data.
      {"sigma", sigma0, 0.5 * dt, 0.5 * span, options.fix_irf},
      {"tau", tau0, 1e-3, 1e4},
      {"amp", area, 0.0, std::numeric_limits<double>::infinity()},
      {"baseline", baseline0},
      {"prompt_amp", 0.0, 0.0, std::numeric_limits<double>::infinity(), !options.fit_prompt},
  };

  std::vector<double> sig;
  if (options.weighting == Weighting::Poisson) {
    sig.reserve(y.size());
    for (double v : y) sig.push_back(std::sqrt(std::max(v, 1.0)));
  }
  auto model = [&](std::span<const double> p, std::span<double> out) {
    const EmgModel m{p[0], p[1], p[2], p[3], p[4], p[5]};
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = emg_eval(m, t[i]);
  };
  auto fit = least_squares(model, y, sig, params);
  fit.model = "emg";
  const double tau = fit.value("tau");
  if (fit.has_flag("at_bound:tau") || !(fit.sigma("tau") < tau)) {
    fit.converged = false;
    fit.flags.emplace_back("tau_unconstrained");
  }
  fit.flags.emplace_back("sigmas_are_fit_errors");
  return fit;
}

EmgModel emg_from_fit(const FitResult& fit) {
  return {fit.value("t0"),  fit.value("sigma"),    fit.value("tau"),
          fit.value("amp"), fit.value("baseline"), fit.value("prompt_amp")};
}

// ---------------------------------------------------------------------------
// Fringes

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double c) { return std::log(c / (1.0 - c)); }

constexpr double kFringeDetection = 6.0;

}  // namespace

FitResult fit_fringe_slice(std::span<const double> x, std::span<const double> row) {
  if (x.size() != row.size()) fail(ErrorCode::InvalidInput, "fringe row size mismatch");
  if (x.size() < 16) fail(ErrorCode::InsufficientData, "fringe row too short");
  const double dx = uniform_step(x);
  const std::size_t n = x.size();

  // Envelope from intensity moments; the cosine averages to 1/2.
  double total = 0.0, first = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::max(row[i], 0.0);
    total += w;
    first += w * x[i];
  }
  if (!(total > 0)) fail(ErrorCode::InsufficientData, "fringe row carries no signal");
  const double x0 = first / total;
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) second += std::max(row[i], 0.0) * (x[i] - x0) * (x[i] - x0);
  const double sigma0 = std::max(std::sqrt(second / total), 2.0 * dx);
  const double amp0 = 2.0 * total * dx / (sigma0 * std::sqrt(2.0 * std::numbers::pi));

  std::vector<double> env(n), resid(n);
  double env_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (x[i] - x0) / sigma0;
    env[i] = amp0 * std::exp(-0.5 * d * d);
    env_sum += env[i];
    resid[i] = row[i] - 0.5 * env[i];
  }

  // Fringe frequency from the padded spectrum of the detrended row, searched
  // above the envelope's own spectral width.
  const std::size_t len = 8 * n;
  const auto spec = detail::real_dft(resid, len);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(len) * dx);
  const double k_min = std::numbers::pi / sigma0;
  std::size_t best = 0;
  std::vector<double> mags;
  for (std::size_t b = 1; b + 1 < spec.size(); ++b) {
    if (static_cast<double>(b) * dk < k_min) continue;
    mags.push_back(std::abs(spec[b]));
    if (best == 0 || std::abs(spec[b]) > std::abs(spec[best])) best = b;
  }
  if (best == 0 || mags.size() < 8)
    fail(ErrorCode::InsufficientData, "fringe row too short to resolve fringes");
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2),
                   mags.end());
  const double median_mag = mags[mags.size() / 2];

  double k0 = static_cast<double>(best) * dk;
  {
    const double a = std::log(std::abs(spec[best - 1]) + 1e-300);
    const double b = std::log(std::abs(spec[best]) + 1e-300);
    const double c = std::log(std::abs(spec[best + 1]) + 1e-300);
    const double den = a - 2.0 * b + c;
    if (den < 0) k0 += 0.5 * (a - c) / den * dk;
  }
  std::complex<double> z{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) z += resid[i] * std::polar(1.0, -k0 * x[i]);
  const double c0 = 4.0 * std::abs(z) / env_sum;
  const double phi0 = std::arg(z);
  // Noise floor on the contrast: the median spectral magnitude, in contrast
  // units, scaled by the detection factor.
  const double c_floor = kFringeDetection * 4.0 * median_mag / env_sum;
  const bool detected = std::abs(spec[best]) > kFringeDetection * median_mag;

  FitResult fit;
  if (!detected && c0 < c_floor) {
    // Envelope-only fit; the contrast is reported as zero.
    std::vector<ParamSpec> params{{"A", amp0, 0.0},
                                  {"x0", x0},
                                  {"sigma", sigma0, 1e-6 * dx}};
    auto env_model = [&](std::span<const double> p, std::span<double> out) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (x[i] - p[1]) / p[2];
        out[i] = 0.5 * p[0] * std::exp(-0.5 * d * d);
      }
    };
    const auto env_fit = least_squares(env_model, row, {}, params);
    fit.names = {"A", "x0", "sigma", "C", "k", "phi"};
    fit.values = {env_fit.values[0], env_fit.values[1], env_fit.values[2], 0.0, k0, 0.0};
    fit.sigmas = {env_fit.sigmas[0], env_fit.sigmas[1], env_fit.sigmas[2], 1.0, 0.0, 0.0};
    fit.covariance.assign(36, 0.0);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) fit.covariance[a * 6 + b] = env_fit.covariance[a * 3 + b];
    fit.covariance[3 * 6 + 3] = 1.0;
    fit.chi2_reduced = env_fit.chi2_reduced;
    fit.initial_cost = env_fit.initial_cost;
    fit.final_cost = env_fit.final_cost;
    fit.iterations = env_fit.iterations;
    fit.converged = env_fit.converged;
    fit.flags = env_fit.flags;
    fit.flags.emplace_back("low_significance");
    fit.model = "fringe";
    return fit;
  }

  constexpr double kLogitBound = 18.0;
  const double u0 = logit(std::clamp(c0, 0.02, 0.98));
  std::vector<ParamSpec> params{
      {"A", amp0, 0.0},
      {"x0", x0},
      {"sigma", sigma0, 1e-6 * dx},
      {"C", u0, -kLogitBound, kLogitBound},
      {"k", k0, 1e-9},
      {"phi", phi0},
  };
  auto model = [&](std::span<const double> p, std::span<double> out) {
    const FringeModel m{p[0], p[1], p[2], logistic(p[3]), p[4], p[5]};
    for (std::size_t i = 0; i < n; ++i) out[i] = fringe_eval(m, x[i]);
  };
  fit = least_squares(model, row, {}, params);
  fit.model = "fringe";

  // Map the logit back to the contrast; first-order covariance transform.
  const double u = fit.values[3];
  const double c = logistic(u);
  const double dcdu = c * (1.0 - c);
  fit.values[3] = c;
  for (std::size_t a = 0; a < 6; ++a) {
    fit.covariance[3 * 6 + a] *= dcdu;
    fit.covariance[a * 6 + 3] *= dcdu;
  }
  fit.sigmas[3] = std::sqrt(std::max(0.0, fit.covariance[3 * 6 + 3]));
  std::erase_if(fit.flags, [](const std::string& f) { return f == "at_bound:C"; });
  // Keep the phase in (-pi, pi].
  fit.values[5] = std::remainder(fit.values[5], 2.0 * std::numbers::pi);
  if (fit.values[2] < 0) fit.values[2] = -fit.values[2];

  if (fit.values[4] * fit.values[2] < 3.0 * std::numbers::pi) fit.flags.emplace_back("few_fringes");
  const bool at_floor = u <= -kLogitBound + 1e-6;
  if (c < 2.0 * fit.sigmas[3] || !detected || at_floor) fit.flags.emplace_back("low_significance");
  return fit;
}

// ---------------------------------------------------------------------------
// Contrast decay

FitResult fit_contrast_decay(std::span<const ContrastPoint> series, DecayShape shape) {
  if (series.size() < 4)
    fail(ErrorCode::InsufficientData, "contrast decay needs at least 4 delays");
  std::vector<ContrastPoint> pts(series.begin(), series.end());
  std::sort(pts.begin(), pts.end(),
            [](const ContrastPoint& a, const ContrastPoint& b) { return a.delay_ps < b.delay_ps; });
  if (!(pts.back().contrast < 0.6 * pts.front().contrast))
    fail(ErrorCode::InsufficientDecay,
         "contrast does not decay below 60% of its initial value over the delay range");

  std::vector<double> delays, data, sig;
  bool weighted = false;
  for (const auto& p : pts) {
    delays.push_back(p.delay_ps);
    data.push_back(p.contrast);
    if (p.sigma > 0) weighted = true;
  }
  if (weighted) {
    for (const auto& p : pts) sig.push_back(p.sigma > 0 ? std::max(p.sigma, 1e-6) : 1.0);
  }

  const double cmin = *std::min_element(data.begin(), data.end());
  const double floor0 = std::clamp(0.5 * cmin, 0.0, 0.5);
  const double c00 = std::clamp(data.front() - floor0, 1e-3, 1.0);
  // 1/e crossing of the decaying part, linearly interpolated.
  double t20 = 0.5 * (delays.back() - delays.front());
  for (std::size_t i = 1; i < data.size(); ++i) {
    const double target = floor0 + c00 / std::numbers::e;
    if (data[i] <= target && data[i - 1] > target) {
      const double f = (data[i - 1] - target) / (data[i - 1] - data[i]);
      t20 = delays[i - 1] + f * (delays[i] - delays[i - 1]) - delays.front();
      break;
    }
  }
  t20 = std::max(t20, 0.1);

  std::vector<ParamSpec> params{
      {"C0", c00, 0.0, 1.0},
      {"T2", t20, 1e-3, 1e6},
      {"floor", floor0, 0.0, 1.0},
  };
  auto model = [&](std::span<const double> p, std::span<double> out) {
    const ContrastDecayModel m{p[0], p[1], shape, p[2]};
    for (std::size_t i = 0; i < delays.size(); ++i) out[i] = contrast_eval(m, delays[i]);
  };
  auto fit = least_squares(model, data, sig, params);
  fit.model = shape == DecayShape::Exponential ? "contrast_decay_exponential"
                                               : "contrast_decay_gaussian";
  if (fit.value("T2") < kInterferometerResolutionPs) fit.flags.emplace_back("resolution_limited");
  return fit;
}

T2BoundReport validate_t2_bound(double t2_ps, double t2_sigma_ps, double t1_ps,
                                double t1_sigma_ps) {
  if (!(t2_ps > 0) || !(t1_ps > 0) || !std::isfinite(t2_ps) || !std::isfinite(t1_ps))
    fail(ErrorCode::InvalidInput, "T1 and T2 must be finite and positive");
  T2BoundReport r;
  r.t2_ps = t2_ps;
  r.t2_sigma_ps = t2_sigma_ps;
  r.t1_ps = t1_ps;
  r.t1_sigma_ps = t1_sigma_ps;
  r.bound_ps = 2.0 * t1_ps;
  const double combined = std::hypot(t2_sigma_ps, 2.0 * t1_sigma_ps);
  r.violation = t2_ps - r.bound_ps > 2.0 * combined;
  r.pure_dephasing_rate = std::max(0.0, 1.0 / t2_ps - 1.0 / (2.0 * t1_ps));
  return r;
}

T2BoundReport validate_t2_bound(const FitResult& t2_fit, double t1_ps, double t1_sigma_ps) {
  return validate_t2_bound(t2_fit.value("T2"), t2_fit.sigma("T2"), t1_ps, t1_sigma_ps);
}

}  // namespace rydbeat
