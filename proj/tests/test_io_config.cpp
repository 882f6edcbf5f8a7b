#include <cstdlib>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "rydbeat/config.hpp"
#include "rydbeat/error.hpp"
#include "rydbeat/io.hpp"

using namespace rydbeat;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& name) {
  const fs::path p = fs::path(RYDBEAT_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string parse_message(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Parse && e.code() != ErrorCode::Config)
      FAIL("unexpected code " << to_string(e.code()) << ": " << e.what());
    return e.what();
  }
  FAIL("expected an error");
  return {};
}

}  // namespace

TEST_SUITE("io_config") {

TEST_CASE("numbers round trip through text") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 17 - 8);
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.5) == "-2.5");
  CHECK(format_number(120.0) == "120");
  CHECK_THROWS_AS(format_number(std::nan("")), Error);
}

TEST_CASE("trace CSV round trip") {
  TimeTrace tr;
  for (int i = 0; i < 50; ++i) {
    tr.t.push_back(-1.0 + 0.1 * i);
    tr.intensity.push_back(std::exp(-0.01 * i) * 1234.5678);
  }
  const auto text = trace_to_csv(tr);
  CHECK(text.rfind("time_ps,intensity\n", 0) == 0);
  const auto back = trace_from_csv(text);
  CHECK(back.t == tr.t);
  CHECK(back.intensity == tr.intensity);
  CHECK(trace_to_csv(back) == text);

  const auto headerless = trace_from_csv("0,1\n0.5, 2\n1,+3\n");
  CHECK(headerless.intensity == std::vector<double>{1.0, 2.0, 3.0});
  const auto crlf = trace_from_csv("time_ps,intensity\r\n0,1\r\n1,2\r\n");
  CHECK(crlf.t.size() == 2);
}

TEST_CASE("trace CSV errors carry position") {
  CHECK(parse_message([] { trace_from_csv("time_ps,intensity\n0,1\n1,abc\n", "t.csv"); }) ==
        "t.csv:3:2: expected a number, got 'abc'");
  CHECK(parse_message([] { trace_from_csv("0,1\n1\n", "t.csv"); }).rfind("t.csv:2:", 0) == 0);
  CHECK(parse_message([] { trace_from_csv("", "t.csv"); }).find("t.csv") != std::string::npos);
  CHECK(parse_message([] { trace_from_csv("0,nan\n", "t.csv"); }).find("non-finite") !=
        std::string::npos);
}

TEST_CASE("spectrogram and fringe CSV round trip") {
  Spectrogram s;
  s.t = {0.0, 0.5, 1.0};
  s.e = {-0.1, 0.0, 0.1, 0.2};
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    s.intensity.emplace_back();
    for (std::size_t j = 0; j < s.e.size(); ++j) s.intensity.back().push_back(i * 10.0 + j / 3.0);
  }
  const auto text = spectrogram_to_csv(s);
  CHECK(text.rfind("time_ps/energy_meV,", 0) == 0);
  const auto back = spectrogram_from_csv(text);
  CHECK(back.t == s.t);
  CHECK(back.e == s.e);
  CHECK(back.intensity == s.intensity);

  FringeImage img;
  img.x = {0, 1, 2};
  img.e = {0.0, 0.05};
  img.intensity = {{1, 2}, {3, 4}, {5, 6}};
  const auto ft = fringe_image_to_csv(img);
  CHECK(ft.rfind("pixel/energy_meV,", 0) == 0);
  const auto fb = fringe_image_from_csv(ft);
  CHECK(fb.x == img.x);
  CHECK(fb.intensity == img.intensity);

  CHECK(parse_message([] { spectrogram_from_csv("corner,0,1\n0,1\n", "s.csv"); })
            .rfind("s.csv:2:", 0) == 0);
}

TEST_CASE("files") {
  const auto dir = tmp_dir("io_files");
  const auto path = dir + "/trace.csv";
  TimeTrace tr{{0.0, 1.0}, {2.0, 3.0}, {}};
  write_text_file(path, trace_to_csv(tr));
  CHECK(load_trace(path).intensity == tr.intensity);
  try {
    load_trace(dir + "/missing.csv");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
  CHECK_THROWS_AS(write_text_file(dir + "/no/such/dir/file", "x"), Error);
}

TEST_CASE("default config") {
  const RunConfig cfg;
  CHECK(cfg.seed == 2021);
  CHECK(cfg.emitters.size() == 1);
  CHECK(cfg.emitters[0].state.label() == "3S");
  CHECK(cfg.instrument.time_fwhm_ps == 2.57);
  CHECK(cfg.analysis.tolerance_meV == 0.12);
  CHECK(cfg.analysis.pad_factor == 8);
  CHECK(cfg.time.values().size() == 1201);
  CHECK(cfg.energy.values().size() == 61);
  CHECK(cfg.energy.values()[12] == -0.9);

  const auto empty = config_from_json("{}");
  CHECK(config_to_json(empty) == config_to_json(cfg));
}

TEST_CASE("config JSON round trip") {
  const auto cfg = config_from_json(R"({
    "seed": 7,
    "emitters": ["4S", {"state": "4D2", "amplitude": 0.5, "phase": 0.1},
                 {"state": "10S", "energy_meV": 3.0, "lifetime_ps": 30}],
    "reference": "4S",
    "cross_visibility": 0.5,
    "pure_dephasing_rate": 0.01,
    "channel": {"center_meV": 0.6, "fwhm_meV": 0.3},
    "noise": {"kind": "gaussian", "sigma": 2.0},
    "time_grid": {"start": -10, "stop": 120, "step": 0.1},
    "analysis": {"anchors": ["4S"], "window": "rect", "detrend": "moving_mean",
                 "moving_mean_width_ps": 12, "decay_shape": "gaussian", "t1_ps": 5.1}
  })");
  CHECK(cfg.seed == 7);
  REQUIRE(cfg.emitters.size() == 3);
  CHECK(cfg.emitters[1].amplitude == 0.5);
  CHECK(cfg.emitters[2].energy_meV == 3.0);
  CHECK(cfg.noise.kind == NoiseKind::Gaussian);
  REQUIRE(cfg.channel);
  CHECK(cfg.channel->fwhm_meV == 0.3);
  CHECK(cfg.analysis.window == Window::Rect);
  CHECK(cfg.analysis.detrend == DetrendMethod::MovingMean);
  CHECK(cfg.analysis.decay_shape == DecayShape::Gaussian);
  CHECK(cfg.analysis.anchors.size() == 1);
  const auto text = config_to_json(cfg);
  CHECK(config_to_json(config_from_json(text)) == text);
}

TEST_CASE("config errors name the field") {
  auto msg = [](const char* text) { return parse_message([&] { config_from_json(text); }); };
  CHECK(msg(R"({"sed": 1})").find("sed") != std::string::npos);
  CHECK(msg(R"({"analysis": {"anchors": ["4Q"]}})").find("analysis.anchors[0]") !=
        std::string::npos);
  CHECK(msg(R"({"noise": {"kind": "pink"}})").find("noise.kind") != std::string::npos);
  CHECK(msg(R"({"cross_visibility": "high"})").find("cross_visibility") != std::string::npos);
  CHECK_FALSE(msg("{").empty());
  try {
    load_config("/nonexistent/run.json");
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

TEST_CASE("emitters from config") {
  const auto& cat = StateCatalog::embedded();
  const auto cfg = config_from_json(R"({"emitters": ["4S", "4D2", {"state": "4F", "energy_meV": 1.71, "lifetime_ps": 5}]})");
  const auto set = build_emitters(cfg, cat);
  REQUIRE(set.emitters.size() == 3);
  CHECK(set.emitters[0].energy_meV == 0.0);
  CHECK(set.emitters[1].energy_meV == doctest::Approx(1.21));
  CHECK(set.emitters[1].lifetime_ps == 5.7);

  const auto unknown = config_from_json(R"({"emitters": ["4S", "12S"]})");
  try {
    build_emitters(unknown, cat);
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("emitters[1]") != std::string::npos);
  }

  RunConfig ch;
  CHECK_FALSE(build_channel(ch));
  ch.channel = ChannelSpec{0.5, 0.6};
  REQUIRE(build_channel(ch));
  CHECK(build_channel(ch)->sigma_meV == doctest::Approx(0.6 / 2.3548200450309493));

  const auto bo = build_beat_options(cfg);
  CHECK(bo.pad_factor == 8);
  CHECK(bo.tolerance_meV == 0.12);
  const auto lo = build_lifetime_options(cfg);
  CHECK(lo.irf_fwhm_ps == 2.57);
}

TEST_CASE("catalog resolution") {
  const auto dir = tmp_dir("catalog");
  RunConfig cfg;
  std::string used;
  CHECK(resolve_catalog(cfg, &used).records().size() == 20);
  CHECK(used == "embedded");

  const auto path = dir + "/small.json";
  write_text_file(path,
                  R"([{"label":"3S","energy_eV":2.16,"hbar_over_gamma_ps":2.85,"lifetime_ps":3.1}])");
  cfg.catalog = path;
  CHECK(resolve_catalog(cfg, &used).records().size() == 1);
  CHECK(used == path);

  ::setenv("RYDBEAT_CATALOG", path.c_str(), 1);
  RunConfig env;
  CHECK(resolve_catalog(env).records().size() == 1);
  ::unsetenv("RYDBEAT_CATALOG");

  cfg.catalog = dir + "/missing.json";
  try {
    resolve_catalog(cfg);
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

}  // TEST_SUITE
