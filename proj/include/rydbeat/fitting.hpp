#pragma once

// Concrete fit models: IRF-convolved exponential decay (lifetime), Gaussian
// modulated fringes (contrast) and contrast-versus-delay decay (coherence).

#include <optional>
#include <span>
#include <vector>

#include "rydbeat/dynamics.hpp"
#include "rydbeat/lsq.hpp"

namespace rydbeat {

/// exp(x^2) erfc(x), accurate for all real x.
double erfcx(double x);

/// Gaussian (t0, sigma) convolved with a unit-area exponential of decay time
/// tau, scaled by amp, plus a prompt Gaussian of peak height prompt_amp at t0
/// and a constant baseline.
struct EmgModel {
  double t0 = 0.0;
  double sigma = 1.0;
  double tau = 1.0;
  double amp = 1.0;
  double baseline = 0.0;
  double prompt_amp = 0.0;
};

double emg_eval(const EmgModel& model, double t);

struct FringeModel {
  double A = 1.0;
  double x0 = 0.0;
  double sigma = 1.0;
  double C = 0.5;
  double k = 0.5;
  double phi = 0.0;
};

/// A exp(-(x - x0)^2 / (2 sigma^2)) * (C cos(k x + phi) + 1) / 2
double fringe_eval(const FringeModel& model, double x);

enum class DecayShape { Exponential, Gaussian };

struct ContrastDecayModel {
  double C0 = 1.0;
  double T2 = 1.0;
  DecayShape shape = DecayShape::Exponential;
  double floor = 0.0;
};

double contrast_eval(const ContrastDecayModel& model, double delay_ps);

enum class Weighting { Unit, Poisson };

struct LifetimeFitOptions {
  std::optional<double> irf_fwhm_ps;  // initial IRF width; 1 ps sigma when absent
  bool fix_irf = false;               // hold sigma at the hint
  bool fit_prompt = false;
  Weighting weighting = Weighting::Unit;
};

/// Fits an EmgModel to a trace. Throws InsufficientCoverage when the maximum
/// sits in the last 20% of the window. A lifetime that collapses onto its
/// lower bound or is less precise than its own value is reported with
/// converged = false and the "tau_unconstrained" flag.
FitResult fit_lifetime(const TimeTrace& trace, const LifetimeFitOptions& options = {});

EmgModel emg_from_fit(const FitResult& fit);

/// Fits a FringeModel to one constant-energy slice. The contrast is fitted
/// through a logistic transform so it stays within [0, 1]. Rows without a
/// detectable fringe frequency come back with C = 0, sigma(C) = 1 and the
/// "low_significance" flag.
FitResult fit_fringe_slice(std::span<const double> x, std::span<const double> row);

struct ContrastPoint {
  double delay_ps = 0.0;
  double contrast = 0.0;
  double sigma = 0.0;  // <= 0 means unknown (unit weight)
};

/// Weighted fit of C0 decay(delay / T2) + floor. Flags "resolution_limited"
/// when T2 < 4 ps.
FitResult fit_contrast_decay(std::span<const ContrastPoint> series,
                             DecayShape shape = DecayShape::Exponential);

inline constexpr double kInterferometerResolutionPs = 4.0;

struct T2BoundReport {
  double t2_ps = 0.0;
  double t2_sigma_ps = 0.0;
  double t1_ps = 0.0;
  double t1_sigma_ps = 0.0;
  double bound_ps = 0.0;  // 2 T1
  bool violation = false;
  double pure_dephasing_rate = 0.0;  // 1/ps
};

/// Violation when T2 - 2 T1 exceeds twice the combined uncertainty.
T2BoundReport validate_t2_bound(double t2_ps, double t2_sigma_ps, double t1_ps,
                                double t1_sigma_ps = 0.0);
T2BoundReport validate_t2_bound(const FitResult& t2_fit, double t1_ps,
                                double t1_sigma_ps = 0.0);

}  // namespace rydbeat
