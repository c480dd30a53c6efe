// Command-line front end: one subcommand per experiment mode, each reading a
// flat key = value config file.
#include <CLI11.hpp>

#include <cstdint>
#include <string>

#include "polyattr/config.hpp"
#include "polyattr/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"polyattr: polynomial-attractor decay rates, wave simulation "
               "and attraction measurements"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool out_given = false;

  for (const auto& mode : polyattr::config::known_modes()) {
    auto* sub = app.add_subcommand(mode, "run the '" + mode + "' experiment");
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option_function<std::string>(
           "--out", [&](const std::string& v) { out_dir = v; out_given = true; },
           "output directory (overrides config and $POLYATTR_OUT)");
    sub->add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t v) { seed = v; seed_given = true; },
           "seed override");
  }

  CLI11_PARSE(app, argc, argv);

  polyattr::runner::RunOptions opts;
  opts.mode = app.get_subcommands().front()->get_name();
  if (seed_given) opts.seed_override = seed;
  if (out_given) opts.out_override = out_dir;

  polyattr::config::Config cfg;
  try {
    cfg = polyattr::config::Config::parse_file(config_path);
  } catch (const polyattr::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return polyattr::runner::kExitConfigError;
  }
  return polyattr::runner::run(cfg, opts);
}
