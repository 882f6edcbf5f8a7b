#include "rydbeat/lsq.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "json.hpp"
#include "rydbeat/error.hpp"

namespace rydbeat {

std::size_t FitResult::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  fail(ErrorCode::NotFound, "fit parameter '" + std::string(name) + "' not present");
}

double FitResult::value(std::string_view name) const { return values[index_of(name)]; }
double FitResult::sigma(std::string_view name) const { return sigmas[index_of(name)]; }

bool FitResult::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::string fit_result_to_json(const FitResult& result, int indent) {
  nlohmann::ordered_json doc;
  doc["model"] = result.model;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  nlohmann::ordered_json sigmas = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    params[result.names[i]] = result.values[i];
    sigmas[result.names[i]] = result.sigmas[i];
  }
  doc["params"] = params;
  doc["sigmas"] = sigmas;
  doc["chi2_reduced"] = result.chi2_reduced;
  doc["converged"] = result.converged;
  doc["flags"] = result.flags;
  doc["iterations"] = result.iterations;
  const std::size_t n = result.names.size();
  auto cov = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < n; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(result.covariance[i * n + j]);
    cov.push_back(row);
  }
  doc["covariance"] = cov;
  return doc.dump(indent);
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Problem {
 public:
  Problem(const ModelFn& model, std::span<const double> data,
          std::span<const double> sigmas, const std::vector<ParamSpec>& params)
      : model_(model), data_(data), sigmas_(sigmas), params_(params),
        full_(params.size()), scratch_(data.size()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      full_[i] = params[i].init;
      if (!params[i].fixed) free_.push_back(i);
    }
  }

  std::size_t free_count() const noexcept { return free_.size(); }
  std::size_t points() const noexcept { return data_.size(); }

  Vec initial() const {
    Vec p(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) p[k] = params_[free_[k]].init;
    return p;
  }

  double lower(std::size_t k) const { return params_[free_[k]].lower; }
  double upper(std::size_t k) const { return params_[free_[k]].upper; }

  Vec clamp(Vec p) const {
    for (Eigen::Index k = 0; k < p.size(); ++k)
      p[k] = std::clamp(p[k], lower(static_cast<std::size_t>(k)),
                        upper(static_cast<std::size_t>(k)));
    return p;
  }

  // Weighted residuals (model - data) / sigma.
  Vec residuals(const Vec& p) {
    for (std::size_t k = 0; k < free_.size(); ++k) full_[free_[k]] = p[static_cast<Eigen::Index>(k)];
    model_(full_, scratch_);
    Vec r(static_cast<Eigen::Index>(data_.size()));
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const double w = sigmas_.empty() ? 1.0 : sigmas_[i];
      r[static_cast<Eigen::Index>(i)] = (scratch_[i] - data_[i]) / w;
    }
    return r;
  }

  Mat jacobian(const Vec& p) {
    const auto m = static_cast<Eigen::Index>(data_.size());
    Mat J(m, p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double h = 6e-6 * std::max(std::abs(p[k]), 1e-2);
      Vec hi = p, lo = p;
      hi[k] = std::min(p[k] + h, upper(static_cast<std::size_t>(k)));
      lo[k] = std::max(p[k] - h, lower(static_cast<std::size_t>(k)));
      const double span = hi[k] - lo[k];
      if (span <= 0) {
        J.col(k).setZero();
        continue;
      }
      J.col(k) = (residuals(hi) - residuals(lo)) / span;
    }
    return J;
  }

  std::vector<double> full(const Vec& p) {
    for (std::size_t k = 0; k < free_.size(); ++k) full_[free_[k]] = p[static_cast<Eigen::Index>(k)];
    return full_;
  }

  const std::vector<std::size_t>& free_indices() const noexcept { return free_; }

 private:
  const ModelFn& model_;
  std::span<const double> data_;
  std::span<const double> sigmas_;
  const std::vector<ParamSpec>& params_;
  std::vector<double> full_;
  std::vector<double> scratch_;
  std::vector<std::size_t> free_;
};

}  // namespace

FitResult least_squares(const ModelFn& model, std::span<const double> data,
                        std::span<const double> sigmas,
                        const std::vector<ParamSpec>& params,
                        const LsqOptions& options) {
  if (!sigmas.empty() && sigmas.size() != data.size())
    fail(ErrorCode::InvalidInput, "sigma count does not match data count");
  for (double s : sigmas)
    if (!(s > 0)) fail(ErrorCode::InvalidInput, "data sigmas must be positive");
  for (const auto& p : params)
    if (!(p.init >= p.lower && p.init <= p.upper))
      fail(ErrorCode::InvalidInput, "initial value of '" + p.name + "' outside its bounds");

  Problem prob(model, data, sigmas, params);
  const std::size_t n = prob.free_count();
  if (prob.points() <= n)
    fail(ErrorCode::DegenerateFit, "need more data points than free parameters");

  Vec p = prob.initial();
  Vec r = prob.residuals(p);
  if (!r.allFinite()) fail(ErrorCode::InvalidInput, "model is not finite at the initial point");
  double cost = 0.5 * r.squaredNorm();

  FitResult result;
  result.initial_cost = cost;
  double lambda = options.initial_lambda;
  bool converged = cost == 0.0;
  int iter = 0;

  while (!converged && iter < options.max_iterations) {
    ++iter;
    const Mat J = prob.jacobian(p);
    for (Eigen::Index k = 0; k < J.cols(); ++k)
      if (J.col(k).squaredNorm() == 0.0)
        fail(ErrorCode::DegenerateFit,
             "parameter '" + params[prob.free_indices()[static_cast<std::size_t>(k)]].name +
                 "' has no effect on the model");
    const Mat A = J.transpose() * J;
    const Vec g = J.transpose() * r;
    const Vec diag = A.diagonal();

    bool accepted = false;
    while (!accepted) {
      Mat damped = A;
      damped.diagonal() += lambda * diag;
      const Vec step = damped.ldlt().solve(-g);
      const Vec trial = prob.clamp(p + step);
      const Vec actual = trial - p;
      const double rel_step = actual.norm() / (p.norm() + 1e-12);
      const Vec r_trial = prob.residuals(trial);
      const double cost_trial = r_trial.allFinite() ? 0.5 * r_trial.squaredNorm()
                                                    : std::numeric_limits<double>::infinity();
      if (cost_trial < cost) {
        const double rel_cost = (cost - cost_trial) / cost;
        p = trial;
        r = r_trial;
        cost = cost_trial;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (cost == 0.0 || rel_cost < options.cost_tolerance ||
            rel_step < options.step_tolerance)
          converged = true;
      } else {
        lambda *= 10.0;
        if (rel_step < options.step_tolerance || lambda > 1e20) {
          // No descent left at working precision: p is stationary.
          converged = true;
          break;
        }
      }
    }
  }

  const Mat J = prob.jacobian(p);
  const Mat A = J.transpose() * J;
  const std::size_t dof = prob.points() - n;
  const double chi2_red = 2.0 * cost / static_cast<double>(dof);

  // Parameters resting on a bound are held there for the covariance.
  std::vector<Eigen::Index> active;
  for (std::size_t a = 0; a < n; ++a) {
    const auto& spec = params[prob.free_indices()[a]];
    const double v = p[static_cast<Eigen::Index>(a)];
    if (v > spec.lower && v < spec.upper) active.push_back(static_cast<Eigen::Index>(a));
  }
  Mat cov_free = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (!active.empty()) {
    const auto m = static_cast<Eigen::Index>(active.size());
    Mat Aa(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) Aa(a, b) = A(active[a], active[b]);
    // Invert in the diagonally scaled basis so badly scaled but well-posed
    // problems are not mistaken for singular ones.
    Vec scale = Aa.diagonal().cwiseSqrt();
    for (Eigen::Index k = 0; k < m; ++k)
      if (!(scale[k] > 0))
        fail(ErrorCode::DegenerateFit,
             "parameter '" +
                 params[prob.free_indices()[static_cast<std::size_t>(active[k])]].name +
                 "' is unconstrained at the solution");
    const Mat S = scale.asDiagonal().inverse() * Aa * scale.asDiagonal().inverse();
    Eigen::SelfAdjointEigenSolver<Mat> eig(S);
    const double emax = eig.eigenvalues().maxCoeff();
    const double emin = eig.eigenvalues().minCoeff();
    if (!(emin > 1e-14 * emax))
      fail(ErrorCode::DegenerateFit, "normal matrix is singular at the solution");
    const Mat inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                    eig.eigenvectors().transpose();
    const Mat cov = scale.asDiagonal().inverse() * inv * scale.asDiagonal().inverse() * chi2_red;
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) cov_free(active[a], active[b]) = cov(a, b);
  }

  const std::size_t total = params.size();
  result.names.reserve(total);
  for (const auto& spec : params) result.names.push_back(spec.name);
  result.values = prob.full(p);
  result.sigmas.assign(total, 0.0);
  result.covariance.assign(total * total, 0.0);
  const auto& idx = prob.free_indices();
  for (std::size_t a = 0; a < n; ++a) {
    result.sigmas[idx[a]] = std::sqrt(std::max(0.0, cov_free(static_cast<Eigen::Index>(a),
                                                              static_cast<Eigen::Index>(a))));
    for (std::size_t b = 0; b < n; ++b)
      result.covariance[idx[a] * total + idx[b]] =
          cov_free(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  result.chi2_reduced = chi2_red;
  result.final_cost = cost;
  result.iterations = iter;
  result.converged = converged;
  if (!converged) result.flags.emplace_back("iteration_cap");
  for (std::size_t a = 0; a < n; ++a) {
    const auto& spec = params[idx[a]];
    const double v = result.values[idx[a]];
    if (v <= spec.lower || v >= spec.upper) result.flags.push_back("at_bound:" + spec.name);
  }
  return result;
}

}  // namespace rydbeat
