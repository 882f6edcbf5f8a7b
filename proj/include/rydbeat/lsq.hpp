#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) least squares with numerical
// Jacobians and box bounds.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace rydbeat {

struct FitResult {
  std::string model;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> sigmas;
  std::vector<double> covariance;  // row-major, names.size() squared
  double chi2_reduced = 0.0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> flags;

  double value(std::string_view name) const;
  double sigma(std::string_view name) const;
  bool has_flag(std::string_view flag) const;
  std::size_t index_of(std::string_view name) const;
};

/// FitResult JSON: {model, params, sigmas, chi2_reduced, converged, flags}
/// plus iterations and the covariance matrix.
std::string fit_result_to_json(const FitResult& result, int indent = 2);

struct ParamSpec {
  std::string name;
  double init = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool fixed = false;
};

struct LsqOptions {
  int max_iterations = 200;
  double cost_tolerance = 1e-10;  // relative cost change
  double step_tolerance = 1e-10;  // relative step size
  double initial_lambda = 1e-3;
};

/// Evaluates the model for a full parameter vector into `out` (one value per
/// data point).
using ModelFn = std::function<void(std::span<const double> params, std::span<double> out)>;

/// Minimizes sum(((model - data) / sigma)^2). Empty `sigmas` means unit
/// weights. Reported sigmas are sqrt(diag((J^T J)^-1) * chi2_reduced).
/// Throws DegenerateFit when there are no more points than free parameters
/// or the normal matrix is singular; hitting the iteration cap returns a
/// result with converged = false. Parameters that finish on a bound are
/// flagged "at_bound:<name>" and held there, so their variance is zero.
FitResult least_squares(const ModelFn& model, std::span<const double> data,
                        std::span<const double> sigmas,
                        const std::vector<ParamSpec>& params,
                        const LsqOptions& options = {});

}  // namespace rydbeat
