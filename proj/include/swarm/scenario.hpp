#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "swarm/interaction_controller.hpp"
#include "swarm/potentials.hpp"
#include "swarm/state.hpp"

namespace swarm {

enum class SimMode { Nominal, Tunable, TunableFromNominal };

SimMode parse_mode(const std::string& name);  // throws ConfigError
std::string mode_name(SimMode mode);

// Initial-condition sampler and obstacle placement knobs.
struct InitSpec {
  double box_side = 0.0;           // 0: auto, delta_d * ceil(cbrt(N))
  double margin = 1.0;             // min pair separation is delta_s + margin
  int max_attempts = 10000;
  bool obstacle_enabled = true;
  std::optional<Eigen::Vector3d> obstacle_position;  // explicit placement
  double obstacle_clearance = 20.0;  // ahead of the foremost robot otherwise
};

// Full description of one simulation run (minus the mode, which is a CLI
// choice). Loaded from a flat key-value config file; see the README for the
// grammar and the defaults.
struct Scenario {
  int n_robots = 16;
  PotentialParams potential;
  InitSpec init;
  Eigen::Vector3d drive_force{1.0, 0.0, 0.0};  // F^c, same on every robot
  double beta = 1.0;           // uniform inter-robot damping
  double mass = 1.0;           // uniform robot mass
  double local_damping = 1.0;  // uniform b_i
  DesiredImpedance impedance;
  double alpha_nominal = 30.0;
  AlphaBounds alpha_bounds;
  double dt = 1e-3;
  double horizon = 10.0;
  double t_bar = 1e-2;  // controller recompute period
  unsigned long seed = 0;
  GammaForm gamma_form = GammaForm::Residual;
  double gamma_cap = 50.0;

  long n_steps() const;
  // Elastic gain applied on in-range edges when no contact is active.
  double idle_gain(SimMode mode) const {
    return mode == SimMode::Tunable ? 1.0 : alpha_nominal;
  }

  void validate() const;  // throws ConfigError
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text,
                        const std::string& origin = "<string>");

// Canonical echo of every effective value, for reproducibility records.
std::string scenario_echo(const Scenario& scenario, SimMode mode,
                          const std::optional<Eigen::Vector3d>& obstacle,
                          bool full_state);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace swarm
