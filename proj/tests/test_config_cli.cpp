#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polyattr/config.hpp"
#include "polyattr/runner.hpp"

using polyattr::config::Config;
using polyattr::config::ConfigError;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("polyattr_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSimulateConfig = R"(
mode = simulate
seed = 7
solver.length = 3.141592653589793
solver.n_modes = 8
solver.dt = 1e-3
solver.k = 0
solver.p = 2
solver.f.c3 = 0
solver.f.c1 = 0
solver.h.amp = 0
solver.kernel.sigma = 0
sim.t_end = 1.0
sim.record_every = 10
sim.init.kind = mode
sim.init.mode = 1
sim.init.a = 1
sim.init.b = 0.5
)";

int run_mode(const std::string& mode, const std::string& text,
             const fs::path& out) {
  polyattr::runner::RunOptions opts;
  opts.mode = mode;
  opts.out_override = out.string();
  return polyattr::runner::run(Config::parse_string(text), opts);
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("comments, whitespace, dotted keys") {
    const auto cfg = Config::parse_string(
        "# header comment\n"
        "  solver.dt = 1e-3  # trailing comment\n"
        "\n"
        "rates.beta = 0.5\n");
    CHECK(cfg.get_double("solver.dt", 0.0) == 1e-3);
    CHECK(cfg.get_double("rates.beta", 0.0) == 0.5);
    CHECK(!cfg.has("rates.bigC"));
  }
  SUBCASE("malformed lines rejected") {
    CHECK_THROWS_AS(Config::parse_string("just a line\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("key =\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n"), ConfigError);
  }
}

TEST_CASE("schema validation") {
  SUBCASE("unknown keys rejected by name") {
    const auto cfg = Config::parse_string("solver.dtt = 1e-3\n");
    try {
      polyattr::config::validate_schema(cfg);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("solver.dtt") != std::string::npos);
    }
  }
  SUBCASE("range violations rejected") {
    CHECK_THROWS_AS(
        polyattr::config::validate_schema(Config::parse_string("rates.beta = 1.5\n")),
        ConfigError);
    CHECK_THROWS_AS(
        polyattr::config::validate_schema(Config::parse_string("solver.k = -1\n")),
        ConfigError);
    CHECK_THROWS_AS(
        polyattr::config::validate_schema(Config::parse_string("mode = warp\n")),
        ConfigError);
    CHECK_NOTHROW(
        polyattr::config::validate_schema(Config::parse_string("solver.k = 0\n")));
  }
  SUBCASE("missing required key named in the error") {
    const auto cfg = Config::parse_string(
        "solver.length = 3.14\nsolver.n_modes = 8\nsolver.dt = 1e-3\n"
        "solver.k = 1\n");
    try {
      polyattr::config::validate_mode_requirements(cfg, "simulate");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("solver.p") != std::string::npos);
    }
  }
}

TEST_CASE("run: missing required key exits 1") {
  const auto out = temp_dir("missing_key");
  const int status = run_mode("simulate",
                              "solver.length = 3.14\nsolver.n_modes = 8\n"
                              "solver.dt = 1e-3\nsolver.k = 1\n",
                              out);
  CHECK(status == polyattr::runner::kExitConfigError);
}

TEST_CASE("run: unknown key exits 1") {
  const auto out = temp_dir("unknown_key");
  CHECK(run_mode("iterate", "rates.beta = 0.5\nrates.bogus = 1\n", out) ==
        polyattr::runner::kExitConfigError);
}

TEST_CASE("run iterate: quadratic block summary") {
  const auto out = temp_dir("iterate");
  const int status = run_mode("iterate",
                              "rates.beta = 0.5\n"
                              "rates.bigC = 0.3333333333333333\n"
                              "rates.y0 = 6\n"
                              "rates.n = 6\n"
                              "out.svg = 1\n",
                              out);
  REQUIRE(status == polyattr::runner::kExitOk);

  const std::string summary = slurp(out / "summary.txt");
  CHECK(summary.find("n0 = 3") != std::string::npos);
  CHECK(summary.find("y0 = 6") != std::string::npos);
  CHECK(summary.find("y1 = 2") != std::string::npos);
  CHECK(summary.find("y2 = 1") != std::string::npos);
  CHECK(summary.find("y3 = 0.618") != std::string::npos);

  const std::string csv = slurp(out / "iterate_trace.csv");
  CHECK(csv.rfind("n,y,bound", 0) == 0);
  CHECK(fs::exists(out / "iterate.svg"));
}

TEST_CASE("run simulate: conservative run keeps the energy column constant") {
  const auto out = temp_dir("simulate");
  REQUIRE(run_mode("simulate", kSimulateConfig, out) == 0);

  std::ifstream in(out / "trajectory.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "time,E,norm_u,norm_ut,norm_grad_u");

  std::string line;
  double e0 = 0.0;
  bool first = true;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(!line.empty());
    CHECK(line.back() != ',');
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    const double e = std::stod(cell);
    if (first) {
      e0 = e;
      first = false;
    }
    CHECK(std::abs(e - e0) <= 1e-10);
    ++rows;
  }
  CHECK(rows == 101);
}

TEST_CASE("run simulate: reruns are byte-identical") {
  const auto out1 = temp_dir("rerun1");
  const auto out2 = temp_dir("rerun2");
  REQUIRE(run_mode("simulate", kSimulateConfig, out1) == 0);
  REQUIRE(run_mode("simulate", kSimulateConfig, out2) == 0);
  CHECK(slurp(out1 / "trajectory.csv") == slurp(out2 / "trajectory.csv"));
  CHECK(slurp(out1 / "summary.txt") == slurp(out2 / "summary.txt"));
}

TEST_CASE("run simulate: numerical blow-up exits 2") {
  const auto out = temp_dir("blowup");
  const int status = run_mode("simulate",
                              "solver.length = 3.141592653589793\n"
                              "solver.n_modes = 4\n"
                              "solver.dt = 1e-3\n"
                              "solver.k = 1\n"
                              "solver.p = 2\n"
                              "solver.kernel.sigma = 0\n"
                              "sim.t_end = 1\n"
                              "sim.init.kind = mode\n"
                              "sim.init.a = 1e150\n",  // cubic overflows
                              out);
  CHECK(status == polyattr::runner::kExitNumericalFailure);
}

TEST_CASE("run pair: report fields present") {
  const auto out = temp_dir("pair");
  const int status = run_mode("pair",
                              "solver.length = 3.141592653589793\n"
                              "solver.n_modes = 8\n"
                              "solver.dt = 2e-3\n"
                              "solver.k = 1\n"
                              "solver.p = 2\n"
                              "pair.T = 0.5\n"
                              "harness.cp_samples = 2000\n",
                              out);
  REQUIRE(status == 0);
  const std::string report = slurp(out / "pair_report.txt");
  CHECK(report.find("rho1 = ") != std::string::npos);
  CHECK(report.find("rho2 = ") != std::string::npos);
  CHECK(report.find("velocity_slack = ") != std::string::npos);
  CHECK(report.find("satisfied = ") != std::string::npos);
  const std::string series = slurp(out / "pair_series.csv");
  CHECK(series.rfind("time,Ez,identity_residual,z_norm,zt_norm,psi_norm", 0) == 0);
}

TEST_CASE("run pair: batch suite emits one row per pair") {
  const auto out = temp_dir("pair_batch");
  const int status = run_mode("pair",
                              "solver.length = 3.141592653589793\n"
                              "solver.n_modes = 4\n"
                              "solver.dt = 5e-3\n"
                              "solver.k = 1\n"
                              "solver.p = 2\n"
                              "pair.T = 0.2\n"
                              "pair.count = 3\n"
                              "harness.cp_samples = 500\n",
                              out);
  REQUIRE(status == 0);
  const std::string batch = slurp(out / "pair_terms.csv");
  CHECK(batch.rfind("pair,", 0) == 0);
  CHECK(std::count(batch.begin(), batch.end(), '\n') == 4);  // header + 3 rows
}

TEST_CASE("run rates: fits the single-mode decay exponent") {
  const auto out = temp_dir("rates");
  const int status = run_mode("rates",
                              "solver.length = 3.141592653589793\n"
                              "solver.n_modes = 1\n"
                              "solver.dt = 1e-3\n"
                              "solver.k = 1\n"
                              "solver.p = 2\n"
                              "solver.f.c3 = 0\n"
                              "solver.f.c1 = 0\n"
                              "solver.h.amp = 0\n"
                              "solver.kernel.sigma = 0\n"
                              "fit.t_end = 2000\n"
                              "fit.window_lo = 100\n"
                              "fit.window_hi = 2000\n"
                              "sim.init.kind = mode\n"
                              "sim.init.a = 1\n"
                              "sim.init.b = 1\n",
                              out);
  REQUIRE(status == 0);
  const std::string summary = slurp(out / "summary.txt");
  CHECK(summary.find("fit_valid = true") != std::string::npos);
  const auto pos = summary.find("fit_exponent = ");
  REQUIRE(pos != std::string::npos);
  const double exponent = std::stod(summary.substr(pos + 15));
  CHECK(exponent == doctest::Approx(-0.5).epsilon(0.15));
}

TEST_CASE("out dir precedence: flag beats environment") {
  const auto flag_dir = temp_dir("outflag");
  const auto env_dir = temp_dir("outenv");
  setenv("POLYATTR_OUT", env_dir.string().c_str(), 1);
  polyattr::runner::RunOptions opts;
  opts.mode = "iterate";
  opts.out_override = flag_dir.string();
  const auto cfg = Config::parse_string(
      "rates.beta = 0.5\nrates.bigC = 0.33333333\nrates.y0 = 6\nout.svg = 0\n");
  REQUIRE(polyattr::runner::run(cfg, opts) == 0);
  CHECK(fs::exists(flag_dir / "summary.txt"));
  CHECK(!fs::exists(env_dir / "summary.txt"));

  polyattr::runner::RunOptions env_opts;
  env_opts.mode = "iterate";
  REQUIRE(polyattr::runner::run(cfg, env_opts) == 0);
  CHECK(fs::exists(env_dir / "summary.txt"));
  unsetenv("POLYATTR_OUT");
}
