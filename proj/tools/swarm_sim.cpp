#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "swarm/errors.hpp"
#include "swarm/harness.hpp"
#include "swarm/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot coupling-scaling simulator"};

  std::string config_path;
  std::string mode_str = "nominal";
  std::string out_dir = "out";
  std::optional<unsigned long> seed;
  std::optional<long> steps;
  std::optional<double> dt;
  bool full_state = false;

  app.add_option("--config", config_path, "Scenario config file")
      ->required();
  app.add_option("--mode", mode_str,
                 "nominal | tunable | tunable-from-nominal")
      ->capture_default_str();
  app.add_option("--seed", seed, "Override sim.seed");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_flag("--full-state", full_state,
               "Append per-robot positions and velocities to metrics.csv");
  app.add_option("--steps", steps, "Override the horizon as a step count");
  app.add_option("--dt", dt, "Override sim.dt");

  CLI11_PARSE(app, argc, argv);

  swarm::SimMode mode;
  try {
    mode = swarm::parse_mode(mode_str);
  } catch (const swarm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  swarm::RunOverrides overrides;
  overrides.seed = seed;
  overrides.steps = steps;
  overrides.dt = dt;
  overrides.full_state = full_state;

  return swarm::run_experiment(config_path, mode, out_dir, overrides);
}
