#include "swarm/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "swarm/errors.hpp"

namespace swarm {

std::vector<Eigen::Vector3d> ForceDecomposition::total() const {
  const size_t n = elastic.size();
  std::vector<Eigen::Vector3d> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = elastic[i] + viscous[i] + drive[i] + local_damping[i] +
           environment[i];
  }
  return w;
}

AssemblyResult assemble_forces(const RobotState& state,
                               const SwarmTopology& topo,
                               const ScalingState& scaling,
                               const DampingSpec& damping,
                               const PotentialParams& params,
                               const std::vector<Eigen::Vector3d>& env_forces,
                               const Eigen::Vector3d& drive_force) {
  const int n = state.size();
  if (topo.n_robots() != n ||
      static_cast<int>(env_forces.size()) != n ||
      scaling.alpha_edges.size() != topo.n_edges() ||
      scaling.c_edges.size() != topo.n_edges() ||
      damping.beta_edges.size() != topo.n_edges()) {
    throw std::invalid_argument("assemble_forces: inconsistent dimensions");
  }

  const std::vector<Eigen::Vector3d> v = state.velocities();

  AssemblyResult out;
  auto zero = std::vector<Eigen::Vector3d>(
      static_cast<size_t>(n), Eigen::Vector3d::Zero());
  out.decomposition.elastic = zero;
  out.decomposition.viscous = zero;
  out.decomposition.drive = std::vector<Eigen::Vector3d>(
      static_cast<size_t>(n), drive_force);
  out.decomposition.local_damping = zero;
  out.decomposition.environment = env_forces;

  auto& elastic = out.decomposition.elastic;
  auto& viscous = out.decomposition.viscous;

  for (int k = 0; k < topo.n_edges(); ++k) {
    const auto [i, j] = topo.edge(k);
    const Eigen::Vector3d rel = state.positions[static_cast<size_t>(i)] -
                                state.positions[static_cast<size_t>(j)];
    const double d = rel.norm();
    if (d <= params.delta_s) {
      throw BarrierViolation(
          "robots " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
              " at distance " + std::to_string(d) + " <= delta_s = " +
              std::to_string(params.delta_s),
          i, j, d);
    }
    out.min_pair_distance = std::min(out.min_pair_distance, d);

    if (d < params.range) {
      const Eigen::Vector3d grad =
          scaling.alpha_edges[k] * kappa(d, params) * rel;
      elastic[static_cast<size_t>(i)] -= grad;
      elastic[static_cast<size_t>(j)] += grad;
    }
    const double beta = damping.beta_edges[k];
    if (beta > 0.0) {
      const Eigen::Vector3d f = scaling.c_edges[k] * beta *
                                (v[static_cast<size_t>(i)] -
                                 v[static_cast<size_t>(j)]);
      viscous[static_cast<size_t>(i)] -= f;
      viscous[static_cast<size_t>(j)] += f;
    }
  }

  out.total.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<size_t>(i);
    out.decomposition.local_damping[ui] =
        -state.local_damping[i] * v[ui];
    out.total[ui] = elastic[ui] + viscous[ui] + out.decomposition.drive[ui] +
                    out.decomposition.local_damping[ui] +
                    out.decomposition.environment[ui];
    out.dissipation -=
        v[ui].dot(viscous[ui] + out.decomposition.local_damping[ui]);
  }
  return out;
}

RobotState step(RobotState state, const std::vector<Eigen::Vector3d>& forces,
                double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  if (forces.size() != state.positions.size()) {
    throw std::invalid_argument("step: force count mismatch");
  }
  const int n = state.size();
  for (int i = 0; i < n; ++i) {
    if (!forces[static_cast<size_t>(i)].allFinite()) {
      throw NumericBlowup(
          "non-finite force on robot " + std::to_string(i + 1), i);
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<size_t>(i);
    state.momenta[ui] += dt * forces[ui];
    state.positions[ui] += dt / state.masses[i] * state.momenta[ui];
  }
  state.time += dt;
  return state;
}

std::optional<double> Trajectory::first_contact_time() const {
  for (const StepRecord& r : records) {
    if (r.contact_robot >= 0) return r.time;
  }
  return std::nullopt;
}

std::vector<double> Trajectory::scaled_energy_series() const {
  std::vector<double> out(records.size());
  for (size_t k = 0; k < records.size(); ++k) out[k] = records[k].scaled_energy;
  return out;
}

std::vector<double> Trajectory::power_series() const {
  std::vector<double> out(records.size());
  for (size_t k = 0; k < records.size(); ++k) out[k] = records[k].power_in;
  return out;
}

std::vector<double> Trajectory::dissipation_series() const {
  std::vector<double> out(records.size());
  for (size_t k = 0; k < records.size(); ++k) out[k] = records[k].dissipation;
  return out;
}

std::vector<char> Trajectory::scaling_changed_series() const {
  std::vector<char> out(records.size());
  for (size_t k = 0; k < records.size(); ++k) {
    out[k] = records[k].scaling_changed ? 1 : 0;
  }
  return out;
}

namespace {

// alpha = idle gain on in-range edges, 1 beyond range; c = 1. With idle
// gain 1 this is the identity.
void fill_idle_scaling(ScalingState& scaling, const SwarmTopology& topo,
                       const std::vector<Eigen::Vector3d>& positions,
                       double idle_gain, double range) {
  scaling.c_edges.setOnes();
  scaling.contact_robot.reset();
  if (idle_gain == 1.0) {
    scaling.alpha_edges.setOnes();
    return;
  }
  for (int k = 0; k < topo.n_edges(); ++k) {
    const auto [i, j] = topo.edge(k);
    const double d = (positions[static_cast<size_t>(i)] -
                      positions[static_cast<size_t>(j)])
                         .norm();
    scaling.alpha_edges[k] = d <= range ? idle_gain : 1.0;
  }
}

}  // namespace

Trajectory simulate(const RobotState& initial, const Scenario& scenario,
                    const std::optional<Obstacle>& obstacle,
                    const SimOptions& options) {
  scenario.validate();
  initial.validate();
  if (initial.size() != scenario.n_robots) {
    throw std::invalid_argument(
        "simulate: initial state has " + std::to_string(initial.size()) +
        " robots, scenario expects " + std::to_string(scenario.n_robots));
  }
  if (obstacle) obstacle->params.validate();

  const SwarmTopology topo(scenario.n_robots);
  const int n = scenario.n_robots;
  const long n_steps = scenario.n_steps();
  const long t_bar_steps =
      std::max(1L, std::lround(scenario.t_bar / scenario.dt));
  const bool tunable = options.mode != SimMode::Nominal;
  const double idle_gain = scenario.idle_gain(options.mode);

  ControllerConfig controller_config;
  controller_config.impedance = scenario.impedance;
  controller_config.alpha_bounds = scenario.alpha_bounds;
  controller_config.potential = scenario.potential;
  controller_config.beta_uniform = scenario.beta;
  controller_config.gamma_form = scenario.gamma_form;
  controller_config.gamma_cap = scenario.gamma_cap;
  controller_config.baseline_gain = idle_gain;
  InteractionController controller(controller_config);

  Trajectory traj;
  traj.mode = options.mode;
  traj.n_robots = n;
  traj.dt = scenario.dt;
  traj.records.reserve(static_cast<size_t>(n_steps) + 1);

  RobotState state = initial;
  ScalingState scaling =
      ScalingState::identity(topo.n_edges(), scenario.alpha_bounds);
  ScalingState override_store = scaling;
  Eigen::VectorXd prev_alpha = scaling.alpha_edges;
  Eigen::VectorXd prev_c = scaling.c_edges;

  const std::vector<Eigen::Vector3d> drive(
      static_cast<size_t>(n), scenario.drive_force);
  std::vector<Eigen::Vector3d> env(static_cast<size_t>(n),
                                   Eigen::Vector3d::Zero());
  EnergyLedger ledger;

  for (long step_idx = 0; step_idx <= n_steps; ++step_idx) {
    double min_obs = std::numeric_limits<double>::infinity();
    if (obstacle) {
      for (int i = 0; i < n; ++i) {
        const double d = (state.positions[static_cast<size_t>(i)] -
                          obstacle->position)
                             .norm();
        if (d <= obstacle->params.delta_s) {
          throw BarrierViolation(
              "robot " + std::to_string(i + 1) + " at distance " +
                  std::to_string(d) + " <= delta_s from the obstacle at step " +
                  std::to_string(step_idx),
              i, -1, d, step_idx);
        }
        min_obs = std::min(min_obs, d);
        env[static_cast<size_t>(i)] =
            obstacle_force(state.positions[static_cast<size_t>(i)], *obstacle);
      }
    }

    const bool update_instant = step_idx % t_bar_steps == 0;
    if (options.scale_override) {
      if (update_instant) {
        override_store =
            ScalingState::identity(topo.n_edges(), scenario.alpha_bounds);
        options.scale_override(step_idx, state, topo, override_store);
      }
      scaling = override_store;
    } else {
      fill_idle_scaling(scaling, topo, state.positions, idle_gain,
                        scenario.potential.range);
      if (tunable) {
        if (update_instant) {
          traj.controller_events.push_back(
              controller.update(step_idx, state, topo, env));
        }
        controller.overlay(scaling);
      }
    }
    const bool scaling_changed =
        step_idx > 0 &&
        (scaling.alpha_edges != prev_alpha || scaling.c_edges != prev_c);
    prev_alpha = scaling.alpha_edges;
    prev_c = scaling.c_edges;

    const DampingSpec damping = make_damping_spec(
        topo, state.positions, scenario.potential.range, scenario.beta);
    AssemblyResult assembly;
    try {
      assembly = assemble_forces(state, topo, scaling, damping,
                                 scenario.potential, env,
                                 scenario.drive_force);
    } catch (const BarrierViolation& e) {
      throw BarrierViolation(std::string(e.what()) + " at step " +
                                 std::to_string(step_idx) + " (t = " +
                                 std::to_string(state.time) + ")",
                             e.robot_a, e.robot_b, e.distance, step_idx);
    }

    update_ledger(ledger, state, topo, scenario.potential, scaling, drive,
                  env, scenario.dt);

    StepRecord rec;
    rec.time = state.time;
    rec.step = step_idx;
    const ContactDetection det = detect_contact(env);
    rec.contact_robot = det.robot.value_or(-1);
    rec.multiple_contacts = det.multiple_contacts;
    if (det.multiple_contacts) ++traj.multiple_contact_steps;

    if (options.mode == SimMode::Nominal || options.scale_override) {
      rec.alpha_star = options.scale_override ? idle_gain
                                              : scenario.alpha_nominal;
      rec.gamma = 1.0;
    } else if (controller.contact_active()) {
      rec.alpha_star = controller.applied_alpha();
      rec.gamma = controller.applied_gamma();
    } else {
      rec.alpha_star = idle_gain;
      rec.gamma = 1.0;
    }
    if (det.robot) {
      const int i = *det.robot;
      const Eigen::Vector3d S =
          net_elastic_vector(i, state, scenario.potential);
      const double s_norm = S.norm();
      const double kd = scenario.impedance.kappa_d;
      const double delta = scenario.impedance.rest_length;
      if (s_norm > 0.0) {
        const Eigen::Vector3d x_bar =
            state.positions[static_cast<size_t>(i)] - delta / s_norm * S;
        rec.cost_f = cost(rec.alpha_star,
                          state.positions[static_cast<size_t>(i)], x_bar, kd,
                          S);
      } else {
        rec.cost_f = kd * delta * kd * delta;  // limit of the reduced form
      }
    }

    rec.total_energy = ledger.total_energy;
    rec.scaled_energy = ledger.scaled_energy;
    rec.supplied_integral = ledger.supplied_integral;
    rec.margin_nominal = ledger.margin_nominal;
    rec.margin_scaled = ledger.margin_scaled;
    rec.barycenter = state.barycenter();
    rec.power_in = ledger.last_power;
    rec.dissipation = assembly.dissipation;
    rec.scaling_changed = scaling_changed;
    rec.min_pair_distance = assembly.min_pair_distance;
    rec.min_obstacle_distance = min_obs;
    traj.records.push_back(rec);

    traj.min_pair_distance =
        std::min(traj.min_pair_distance, assembly.min_pair_distance);
    traj.min_obstacle_distance = std::min(traj.min_obstacle_distance, min_obs);

    if (options.record_full) {
      traj.states.push_back(state);
      traj.decomps.push_back(assembly.decomposition);
    }

    if (step_idx < n_steps) {
      try {
        state = step(std::move(state), assembly.total, scenario.dt);
      } catch (const NumericBlowup& e) {
        throw NumericBlowup(std::string(e.what()) + " at step " +
                                std::to_string(step_idx) + " (t = " +
                                std::to_string(step_idx * scenario.dt) + ")",
                            e.robot, step_idx);
      }
      // Keep the time grid exactly n * dt instead of accumulating.
      state.time = initial.time + static_cast<double>(step_idx + 1) *
                                      scenario.dt;
    }
  }

  traj.ledger = ledger;
  traj.total_messages = controller.total_messages();
  return traj;
}

}  // namespace swarm
