#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "swarm/energy_monitor.hpp"
#include "swarm/interaction_controller.hpp"
#include "swarm/potentials.hpp"
#include "swarm/scenario.hpp"
#include "swarm/state.hpp"
#include "swarm/topology.hpp"

namespace swarm {

// Per-robot input force split by origin. total() sums the parts in the
// fixed order elastic, viscous, drive, local damping, environment, so the
// decomposition always reproduces w exactly.
struct ForceDecomposition {
  std::vector<Eigen::Vector3d> elastic;
  std::vector<Eigen::Vector3d> viscous;
  std::vector<Eigen::Vector3d> drive;
  std::vector<Eigen::Vector3d> local_damping;
  std::vector<Eigen::Vector3d> environment;

  std::vector<Eigen::Vector3d> total() const;
};

struct AssemblyResult {
  std::vector<Eigen::Vector3d> total;  // w
  ForceDecomposition decomposition;
  double dissipation = 0.0;  // v^T B_underbar v, from viscous + local terms
  double min_pair_distance = std::numeric_limits<double>::infinity();
};

// Input force on every robot:
//   w_i = -sum_j alpha_k grad V_ij - sum_j c_k beta_ij (v_i - v_j)
//         + F_i^c - b_i v_i + F_i^e
// with the gains taken per edge from the scaling state. Throws
// BarrierViolation when any pair distance is at or below delta_s.
AssemblyResult assemble_forces(const RobotState& state,
                               const SwarmTopology& topo,
                               const ScalingState& scaling,
                               const DampingSpec& damping,
                               const PotentialParams& params,
                               const std::vector<Eigen::Vector3d>& env_forces,
                               const Eigen::Vector3d& drive_force);

// One semi-implicit Euler step: p += dt * w, then x += dt * p / m. Throws
// NumericBlowup on non-finite force components.
RobotState step(RobotState state, const std::vector<Eigen::Vector3d>& forces,
                double dt);

// One row of the per-step time series.
struct StepRecord {
  double time = 0.0;
  long step = 0;
  int contact_robot = -1;  // 0-based; -1 when no environment force
  bool multiple_contacts = false;
  double cost_f = -1.0;    // -1 exactly when contact_robot is -1
  double alpha_star = 1.0;
  double gamma = 1.0;
  double total_energy = 0.0;
  double scaled_energy = 0.0;
  double supplied_integral = 0.0;
  double margin_nominal = 0.0;
  double margin_scaled = 0.0;
  Eigen::Vector3d barycenter = Eigen::Vector3d::Zero();
  double power_in = 0.0;
  double dissipation = 0.0;
  bool scaling_changed = false;
  double min_pair_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  SimMode mode = SimMode::Nominal;
  int n_robots = 0;
  double dt = 0.0;
  std::vector<StepRecord> records;  // one per step, t = 0 .. horizon
  std::vector<ControllerEvent> controller_events;
  std::vector<RobotState> states;            // only with record_full
  std::vector<ForceDecomposition> decomps;   // only with record_full
  EnergyLedger ledger;
  double min_pair_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  long total_messages = 0;
  long multiple_contact_steps = 0;

  std::optional<double> first_contact_time() const;

  std::vector<double> scaled_energy_series() const;
  std::vector<double> power_series() const;
  std::vector<double> dissipation_series() const;
  std::vector<char> scaling_changed_series() const;
};

struct SimOptions {
  SimMode mode = SimMode::Nominal;
  bool record_full = false;
  // Test hook: replaces the optimizer at every recompute instant. Receives a
  // fresh identity scaling to fill; the result stays frozen until the next
  // instant.
  std::function<void(long step, const RobotState& state,
                     const SwarmTopology& topo, ScalingState& scaling)>
      scale_override;
};

// Runs the configured horizon: refresh neighborhood-dependent terms,
// recompute the contact robot's scales every t_bar (tunable modes), assemble
// forces, account energies, step. Aborts with BarrierViolation or
// NumericBlowup carrying the step index.
Trajectory simulate(const RobotState& initial, const Scenario& scenario,
                    const std::optional<Obstacle>& obstacle,
                    const SimOptions& options);

}  // namespace swarm
