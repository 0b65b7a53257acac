#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "swarm/dynamics.hpp"
#include "swarm/scenario.hpp"

namespace swarm {

// Rejection-samples initial positions in a box sized to the swarm: every
// pair farther apart than delta_s + margin, every robot in range of at
// least one other. Momenta start at zero. Deterministic for a fixed seed;
// throws InfeasibleDensity when the attempt budget runs out.
RobotState generate_initial(const Scenario& scenario);

// Point obstacle on the drive axis, obstacle_clearance ahead of the
// foremost robot (or at the configured explicit position). nullopt when
// disabled.
std::optional<Obstacle> resolve_obstacle(const Scenario& scenario,
                                         const RobotState& initial);

// Percentage deviation of the tunable barycenter from the nominal one,
// per axis, with an epsilon guard on the denominator. Both trajectories
// must share the time grid.
struct DeviationSeries {
  std::vector<double> time;
  std::array<std::vector<double>, 3> percent;
};

DeviationSeries barycenter_deviation(const Trajectory& tunable,
                                     const Trajectory& nominal);

void write_metrics_csv(const std::string& path, const Trajectory& traj,
                       bool full_state);
void write_summary(const std::string& path, const Trajectory& traj,
                   const Scenario& scenario);

struct RunOverrides {
  std::optional<unsigned long> seed;
  std::optional<long> steps;   // overrides horizon as steps * dt
  std::optional<double> dt;
  bool full_state = false;
};

// Loads the config, generates the scenario, simulates, writes metrics.csv,
// summary.txt and config_echo.cfg into out_dir. Returns the process exit
// code: 0 ok, 2 config error, 3 physics abort, 4 certificate failure.
int run_experiment(const std::string& config_path, SimMode mode,
                   const std::string& out_dir, const RunOverrides& overrides);

// Same, for an already-parsed scenario (no file input).
int run_experiment(const Scenario& scenario, SimMode mode,
                   const std::string& out_dir, const RunOverrides& overrides);

// Worker count for batch execution: SWARM_SIM_THREADS caps (or sets) the
// hardware concurrency.
int batch_thread_count();

// Runs fn(0) .. fn(n_jobs - 1) on the batch workers. fn must only touch
// per-index state. Exceptions propagate to the caller.
void run_indexed_batch(int n_jobs, const std::function<void(int)>& fn);

}  // namespace swarm
