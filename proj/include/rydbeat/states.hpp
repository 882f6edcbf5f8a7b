#pragma once

// Exciton state catalog, unit conversions and Rydberg scaling laws.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rydbeat {

namespace phys {
/// Planck constant in meV per THz (equivalently meV·ps).
inline constexpr double kPlanck = 4.135667696;
/// Reduced Planck constant in meV·ps.
inline constexpr double kHbar = 0.6582119569;
}  // namespace phys

enum class Series { S, P, D, F };
enum class SeriesColor { Yellow, Green };

char series_letter(Series s) noexcept;
Series parse_series(std::string_view text);

/// Identifies one exciton level. Labels look like "4S", "4D2", "6D" or "1Sg"
/// (trailing g marks the green series).
struct StateId {
  int n = 1;
  Series series = Series::S;
  int sublevel = 0;
  SeriesColor color = SeriesColor::Yellow;

  static StateId parse(std::string_view label);
  std::string label() const;

  auto operator<=>(const StateId&) const = default;
};

enum class Source { Measured, Literature };

struct StateRecord {
  StateId id;
  double energy_eV = 0.0;
  double hbar_over_gamma_ps = 0.0;
  double hbar_over_gamma_err_ps = 0.0;
  double lifetime_ps = 0.0;
  double lifetime_err_ps = 0.0;
  Source source = Source::Measured;
};

struct SplitOverride {
  StateId a;
  StateId b;
  double split_meV = 0.0;
};

struct SplitResult {
  double split_meV = 0.0;           // override when present, else table difference
  std::optional<double> table_meV;  // |E_a - E_b| when both states have records
  bool overridden = false;
};

/// Immutable ordered collection of state records plus quoted beat splits.
class StateCatalog {
 public:
  StateCatalog() = default;
  StateCatalog(std::vector<StateRecord> records,
               std::vector<SplitOverride> overrides);

  static const StateCatalog& embedded();

  const std::vector<StateRecord>& records() const noexcept { return records_; }
  const std::vector<SplitOverride>& overrides() const noexcept {
    return overrides_;
  }

  const StateRecord* find(const StateId& id) const noexcept;
  const StateRecord& at(const StateId& id) const;
  std::optional<double> override_for(const StateId& a,
                                     const StateId& b) const noexcept;

  /// Every state mentioned by a record or by an override, sorted.
  std::vector<StateId> known_states() const;
  bool knows(const StateId& id) const noexcept;

 private:
  std::vector<StateRecord> records_;
  std::vector<SplitOverride> overrides_;
};

// Catalog JSON: {"states": [...], "split_overrides": [...]}. A bare array of
// state objects is accepted on input.
std::string catalog_to_json(const StateCatalog& catalog);
StateCatalog catalog_from_json(std::string_view text);
StateCatalog load_catalog(const std::string& path);

double thz_to_mev(double nu_thz);
double mev_to_thz(double e_meV);
double inverse_linewidth(double gamma_meV);

SplitResult energy_split(const StateId& a, const StateId& b,
                         const StateCatalog& catalog);

struct RydbergModel {
  double gap_energy_eV = 0.0;
  double rydberg_energy_meV = 0.0;
  std::map<Series, double> defects;
  std::map<Series, double> lifetime_scale;  // A_L in ps
  int plateau_n = 7;
  std::map<Series, double> plateau_lifetime;

  static std::map<Series, double> default_defects();
};

struct CalibrationOptions {
  int n_min = 4;
  int n_max = 6;
  bool weighted = false;  // weight by 1/lifetime_err^2
  int plateau_n = 7;
  int plateau_n_max = 9;
};

/// Least-squares A_L for tau = A_L (n - delta_L)^3 over measured lifetimes of
/// the yellow series with n in [n_min, n_max].
double calibrate_lifetime_scale(const StateCatalog& catalog, Series series,
                                double defect, const CalibrationOptions& opts);

/// Builds a model for the S and D series from the catalog: scales, plateau
/// means, and (E_g, Ry*) from the S-series energies.
RydbergModel calibrate_model(const StateCatalog& catalog,
                             const CalibrationOptions& opts = {});

double predicted_lifetime(const StateId& id, const RydbergModel& model);

struct RydbergEnergyFit {
  double gap_energy_eV = 0.0;
  double rydberg_energy_meV = 0.0;
  std::vector<std::pair<StateId, double>> residuals_meV;
};

/// Fits E_n = E_g - Ry*/(n - delta)^2 with delta held fixed.
RydbergEnergyFit fit_rydberg_energies(const StateCatalog& catalog,
                                      Series series, int n_min, int n_max,
                                      double defect);

struct LinewidthCheckRow {
  StateId id;
  double lifetime_ps = 0.0;
  double hbar_over_gamma_ps = 0.0;
  double difference_ps = 0.0;
  double combined_err_ps = 0.0;
  std::string expectation;  // "match" or "exceeds"
  bool pass = false;
};

/// S states (yellow, n in [2, 9]) must agree with hbar/Gamma within
/// k_sigma times the summed quoted errors; D states with n in [4, 6] must
/// outlive hbar/Gamma.
std::vector<LinewidthCheckRow> check_linewidth_consistency(
    const StateCatalog& catalog, double k_sigma = 1.0);

}  // namespace rydbeat
