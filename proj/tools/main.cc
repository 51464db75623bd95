// symvar: batch runner for the symmetric variational principles.
//
//   symvar run <config.json> [--seed N] [--out DIR] [--samples N]
//   symvar config <config.json>   canonical form of a config
//   symvar schema                 the config JSON Schema
//
// Exit status: 0 PASS, 2 FAILED certificate, 1 any error.

#include <iostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "run.hpp"
#include "symvar/errors.hpp"

int main(int argc, char** argv) {
  using namespace symvar::cli;
  CLI::App app{"symmetric variational principles on discrete grids"};
  app.require_subcommand(1);

  std::string path;
  std::uint64_t seed = 0;
  int samples = 0;
  std::string out;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("config", path, "experiment config (JSON)")->required();
  CLI::Option* seed_opt = run_cmd->add_option("--seed", seed, "override the config seed");
  CLI::Option* samples_opt = run_cmd->add_option("--samples", samples, "override the verification sample count");
  CLI::Option* out_opt = run_cmd->add_option("--out", out, "output directory (default: $SYMVAR_OUT or ./symvar_out)");

  CLI::App* config_cmd = app.add_subcommand("config", "print the canonical form of a config");
  config_cmd->add_option("config", path, "experiment config (JSON)")->required();

  app.add_subcommand("schema", "print the config JSON Schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (app.got_subcommand("schema")) {
      std::cout << config_schema().dump(2) << "\n";
      return kExitPass;
    }
    ExperimentConfig c = load_config(path);
    if (app.got_subcommand("config")) {
      std::cout << canonical_text(c);
      return kExitPass;
    }
    Overrides o;
    if (*seed_opt) o.seed = seed;
    if (*samples_opt) o.samples = samples;
    if (*out_opt) o.out = out;
    return run(c, o, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << path << ": " << e.what() << "\n";
  } catch (const symvar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
