#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "rydbeat/error.hpp"
#include "rydbeat/states.hpp"

using namespace rydbeat;

namespace {

StateId id(const char* label) { return StateId::parse(label); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_SUITE("states") {

TEST_CASE("state labels round trip") {
  for (const char* label : {"1Sg", "2S", "2P", "4D1", "4D2", "6D", "4F", "12S"})
    CHECK(StateId::parse(label).label() == label);
  const auto d = id("5D2");
  CHECK(d.n == 5);
  CHECK(d.series == Series::D);
  CHECK(d.sublevel == 2);
  CHECK(id("1Sg").color == SeriesColor::Green);
  for (const char* bad : {"", "S", "4", "4X", "4S1", "4D3", "0S", "4Dx"})
    CHECK(code_of([&] { StateId::parse(bad); }) == ErrorCode::InvalidInput);
}

TEST_CASE("frequency and energy conversions") {
  CHECK(thz_to_mev(0.30) == doctest::Approx(1.2407).epsilon(5e-5));
  CHECK(thz_to_mev(0.065) == doctest::Approx(0.2688).epsilon(5e-4));
  CHECK(mev_to_thz(1.21) == doctest::Approx(0.2926).epsilon(2e-4));
  CHECK(std::round(thz_to_mev(0.30) * 100) / 100 == doctest::Approx(1.24));
  CHECK(std::round(thz_to_mev(0.065) * 100) / 100 == doctest::Approx(0.27));
  for (double nu : {0.0, 1e-4, 0.04, 0.3, 1.7, 25.0}) {
    CHECK(std::abs(mev_to_thz(thz_to_mev(nu)) - nu) <= 1e-12 * std::max(1.0, nu));
  }
  CHECK(code_of([] { thz_to_mev(-0.1); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { mev_to_thz(std::nan("")); }) == ErrorCode::InvalidInput);
}

TEST_CASE("inverse linewidth") {
  CHECK(inverse_linewidth(0.2310) == doctest::Approx(2.85).epsilon(1e-3));
  CHECK(inverse_linewidth(0.1316) == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(code_of([] { inverse_linewidth(0.0); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { inverse_linewidth(-1.0); }) == ErrorCode::InvalidInput);
}

TEST_CASE("embedded catalog contents") {
  const auto& cat = StateCatalog::embedded();
  CHECK(cat.records().size() == 20);
  CHECK(cat.at(id("3S")).lifetime_ps == doctest::Approx(3.1));
  CHECK(cat.at(id("3S")).hbar_over_gamma_ps == doctest::Approx(2.85));
  CHECK(cat.at(id("4D2")).lifetime_ps == doctest::Approx(5.7));
  CHECK(cat.at(id("7S")).lifetime_ps == doctest::Approx(20.0));
  CHECK(cat.find(id("4F")) == nullptr);
  CHECK(cat.knows(id("4F")));
  CHECK_FALSE(cat.knows(id("10S")));
  CHECK(code_of([&] { cat.at(id("9F")); }) == ErrorCode::NotFound);
  // Energies increase with n inside the yellow S series.
  double prev = 0.0;
  for (int n = 2; n <= 9; ++n) {
    const double e = cat.at(StateId{n, Series::S}).energy_eV;
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("energy splits prefer quoted values") {
  const auto& cat = StateCatalog::embedded();
  const auto s = energy_split(id("4S"), id("4D2"), cat);
  CHECK(s.overridden);
  CHECK(s.split_meV == doctest::Approx(1.21));
  REQUIRE(s.table_meV);
  CHECK(*s.table_meV == doctest::Approx(1.13).epsilon(1e-6));

  const auto r = energy_split(id("6S"), id("5S"), cat);
  CHECK(r.split_meV == doctest::Approx(1.28));
  CHECK(*r.table_meV == doctest::Approx(1.36).epsilon(1e-6));

  const auto plain = energy_split(id("3S"), id("3D2"), cat);
  CHECK_FALSE(plain.overridden);
  CHECK(plain.split_meV == doctest::Approx(2.85).epsilon(1e-6));

  // Only a quoted value exists for pairs with a state missing from the table.
  const auto f = energy_split(id("4D2"), id("4F"), cat);
  CHECK(f.overridden);
  CHECK_FALSE(f.table_meV);
  CHECK(f.split_meV == doctest::Approx(0.50));

  CHECK(energy_split(id("5S"), id("5S"), cat).split_meV == 0.0);
  CHECK(code_of([&] { energy_split(id("4S"), id("5F"), cat); }) == ErrorCode::NotFound);
}

TEST_CASE("energy split is symmetric") {
  const auto& cat = StateCatalog::embedded();
  const auto states = cat.known_states();
  for (const auto& a : states)
    for (const auto& b : states) {
      SplitResult ab, ba;
      bool ok_ab = true, ok_ba = true;
      try { ab = energy_split(a, b, cat); } catch (const Error&) { ok_ab = false; }
      try { ba = energy_split(b, a, cat); } catch (const Error&) { ok_ba = false; }
      REQUIRE(ok_ab == ok_ba);
      if (ok_ab) CHECK(ab.split_meV == ba.split_meV);
    }
}

TEST_CASE("catalog validation") {
  StateRecord r{id("4S"), 2.0, 1.0, 0.1, 1.0, 0.1, Source::Measured};
  CHECK(code_of([&] { StateCatalog({r, r}, {}); }) == ErrorCode::InvalidInput);
  auto neg = r;
  neg.lifetime_ps = -1.0;
  CHECK(code_of([&] { StateCatalog({neg}, {}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([&] {
          StateCatalog({r}, {{id("4S"), id("4D2"), 1.0}, {id("4D2"), id("4S"), 1.1}});
        }) == ErrorCode::InvalidInput);
}

TEST_CASE("catalog JSON round trip") {
  const auto& cat = StateCatalog::embedded();
  const auto back = catalog_from_json(catalog_to_json(cat));
  REQUIRE(back.records().size() == cat.records().size());
  for (std::size_t i = 0; i < cat.records().size(); ++i) {
    const auto& a = cat.records()[i];
    const auto& b = back.records()[i];
    CHECK(a.id == b.id);
    CHECK(a.energy_eV == b.energy_eV);
    CHECK(a.lifetime_ps == b.lifetime_ps);
    CHECK(a.lifetime_err_ps == b.lifetime_err_ps);
    CHECK(a.hbar_over_gamma_ps == b.hbar_over_gamma_ps);
    CHECK(a.source == b.source);
  }
  CHECK(back.overrides().size() == cat.overrides().size());
  CHECK(catalog_to_json(back) == catalog_to_json(cat));

  const auto bare = catalog_from_json(
      R"([{"label":"4S","energy_eV":2.16554,"hbar_over_gamma_ps":5,"lifetime_ps":5.1}])");
  CHECK(bare.records().size() == 1);
  CHECK(bare.overrides().empty());

  CHECK(code_of([] { catalog_from_json("{"); }) == ErrorCode::Parse);
  CHECK(code_of([] { catalog_from_json(R"({"rows":[]})"); }) == ErrorCode::Parse);
  CHECK(code_of([] {
          catalog_from_json(R"([{"label":"4S","n":5,"energy_eV":2,"hbar_over_gamma_ps":1,"lifetime_ps":1}])");
        }) == ErrorCode::Parse);
  CHECK(code_of([] { load_catalog("/nonexistent/catalog.json"); }) == ErrorCode::Io);
}

TEST_CASE("lifetime scale calibration matches a direct least-squares solve") {
  const auto& cat = StateCatalog::embedded();
  const double delta = 0.56;
  // Oracle: one-column design matrix solved by QR.
  Eigen::MatrixXd X(3, 1);
  Eigen::VectorXd y(3);
  for (int n = 4; n <= 6; ++n) {
    X(n - 4, 0) = std::pow(n - delta, 3);
    y(n - 4) = cat.at(StateId{n, Series::S}).lifetime_ps;
  }
  const double oracle = X.householderQr().solve(y)(0);
  const double a_s = calibrate_lifetime_scale(cat, Series::S, delta, {});
  CHECK(a_s == doctest::Approx(oracle).epsilon(1e-12));

  const auto model = calibrate_model(cat);
  const double p5 = predicted_lifetime(id("5S"), model);
  const double p6 = predicted_lifetime(id("6S"), model);
  CHECK(p5 >= 10.2);
  CHECK(p5 <= 12.6);
  CHECK(p6 >= 17.5);
  CHECK(p6 <= 20.5);
  const double r54 = p5 / predicted_lifetime(id("4S"), model);
  CHECK(r54 == doctest::Approx(std::pow((5 - delta) / (4 - delta), 3)).epsilon(1e-12));
  // Plateau from n = 7 on.
  CHECK(predicted_lifetime(id("8S"), model) == predicted_lifetime(id("7S"), model));
  CHECK(predicted_lifetime(id("7S"), model) == doctest::Approx((20.0 + 21.5 + 22.0) / 3));

  CalibrationOptions empty;
  empty.n_min = 20;
  empty.n_max = 30;
  CHECK(code_of([&] { calibrate_lifetime_scale(cat, Series::S, delta, empty); }) ==
        ErrorCode::InsufficientData);
}

TEST_CASE("rydberg energy fit") {
  const auto& cat = StateCatalog::embedded();
  const auto fit = fit_rydberg_energies(cat, Series::S, 3, 9, 0.56);
  CHECK(fit.residuals_meV.size() == 7);
  for (const auto& [state, res] : fit.residuals_meV) CHECK(std::abs(res) < 0.5);
  CHECK(fit.rydberg_energy_meV > 50);
  CHECK(fit.rydberg_energy_meV < 150);

  // Synthetic series generated from known constants comes back exactly.
  std::vector<StateRecord> rows;
  for (int n = 3; n <= 8; ++n)
    rows.push_back({StateId{n, Series::S}, 2.172 - 0.092 / std::pow(n - 0.5, 2), 1, 0, 1, 0,
                    Source::Measured});
  const auto synth = fit_rydberg_energies(StateCatalog(rows, {}), Series::S, 3, 8, 0.5);
  CHECK(synth.gap_energy_eV == doctest::Approx(2.172).epsilon(1e-12));
  CHECK(synth.rydberg_energy_meV == doctest::Approx(92.0).epsilon(1e-9));

  CHECK(code_of([&] { fit_rydberg_energies(cat, Series::S, 3, 4, 0.56); }) ==
        ErrorCode::InsufficientData);
}

TEST_CASE("linewidth consistency over the embedded catalog") {
  const auto rows = check_linewidth_consistency(StateCatalog::embedded());
  int s_rows = 0, d_rows = 0;
  std::vector<std::string> failing;
  for (const auto& r : rows) {
    if (r.expectation == "match") ++s_rows;
    if (r.expectation == "exceeds") {
      ++d_rows;
      CHECK(r.pass);
    }
    CHECK(r.difference_ps == doctest::Approx(r.lifetime_ps - r.hbar_over_gamma_ps));
    if (!r.pass) failing.push_back(r.id.label());
  }
  CHECK(s_rows == 8);
  CHECK(d_rows == 5);
  // 3S and 9S differ from their inverse linewidths by more than the summed
  // quoted errors.
  CHECK(failing == std::vector<std::string>{"3S", "9S"});
  // A three-sigma tolerance admits both.
  for (const auto& r : check_linewidth_consistency(StateCatalog::embedded(), 3.0))
    CHECK(r.pass);
}

}  // TEST_SUITE
