#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const fs::path log = fs::path(RYDBEAT_TEST_TMP) / "last.log";
  fs::create_directories(log.parent_path());
  const std::string cmd = std::string("\"") + RYDBEAT_CLI + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string out(const std::string& name) {
  const fs::path p = fs::path(RYDBEAT_TEST_TMP) / name;
  fs::remove_all(p);
  return p.string();
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::path(RYDBEAT_TEST_TMP) / name;
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("version and usage") {
  const auto v = run("--version");
  CHECK(v.code == 0);
  CHECK_FALSE(v.output.empty());
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("simulate").code == 2);
  CHECK(run("simulate hologram").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("beats /nonexistent/trace.csv").code == 2);
  CHECK(run("simulate trace --config /nonexistent/run.json").code == 2);
}

TEST_CASE("simulate, fit and beats") {
  const auto dir = out("cli_trace");
  const auto cfg = write_config("cli_4s.json", R"({
    "emitters": ["4S", "4D2"],
    "time_grid": {"start": -10, "stop": 120, "step": 0.1},
    "analysis": {"anchors": ["4S"]}
  })");
  const auto sim = run("simulate trace --config " + cfg + " -o " + dir);
  CHECK(sim.code == 0);
  CHECK(fs::exists(dir + "/trace.csv"));

  const auto again = out("cli_trace_again");
  CHECK(run("simulate trace --config " + cfg + " -o " + again).code == 0);
  CHECK(slurp(dir + "/trace.csv") == slurp(again + "/trace.csv"));
  const auto seeded = out("cli_trace_seeded");
  CHECK(run("simulate trace --seed 9 --config " + cfg + " -o " + seeded).code == 0);
  CHECK(slurp(dir + "/trace.csv") != slurp(seeded + "/trace.csv"));

  CHECK(run("fit lifetime " + dir + "/trace.csv --config " + cfg + " -o " + dir).code == 0);
  CHECK(fs::exists(dir + "/lifetime_fit.json"));
  const auto beats = run("beats " + dir + "/trace.csv --config " + cfg + " -o " + dir);
  CHECK(beats.code == 0);
  CHECK(slurp(dir + "/beats.json").find("4S-4D2") != std::string::npos);
}

TEST_CASE("error exit codes") {
  const auto bad_anchor = write_config("cli_bad_anchor.json", R"({"analysis": {"anchors": ["4Q"]}})");
  CHECK(run("simulate trace --config " + bad_anchor + " -o " + out("cli_bad")).code == 2);

  const auto unknown = write_config("cli_unknown.json", R"({"emitters": ["9F"]})");
  const auto r = run("simulate trace --config " + unknown + " -o " + out("cli_unknown"));
  CHECK(r.code != 0);

  const auto missing_cat =
      write_config("cli_missing_cat.json", R"({"catalog": "/nonexistent/catalog.json"})");
  const auto m = run("simulate trace --config " + missing_cat + " -o " + out("cli_missing"));
  CHECK(m.code == 2);
  CHECK(m.output.find("catalog") != std::string::npos);

  const auto garbage = write_config("cli_garbage.csv", "time_ps,intensity\n0,abc\n");
  const auto g = run("fit lifetime " + garbage + " -o " + out("cli_garbage"));
  CHECK(g.code == 2);
  CHECK(g.output.find(":2:") != std::string::npos);
}

TEST_CASE("reproduce coherence") {
  const auto dir = out("cli_reproduce");
  const auto r = run("reproduce coherence -o " + dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir + "/reproduce.json"));
  CHECK(fs::exists(dir + "/reproduce.txt"));
}
