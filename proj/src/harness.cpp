#include "swarm/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <stdexcept>

#include "swarm/errors.hpp"

namespace swarm {

namespace fs = std::filesystem;

RobotState generate_initial(const Scenario& scenario) {
  const int n = scenario.n_robots;
  const double side =
      scenario.init.box_side > 0.0
          ? scenario.init.box_side
          : scenario.potential.delta_d *
                std::ceil(std::cbrt(static_cast<double>(n)));
  const double min_sep = scenario.potential.delta_s + scenario.init.margin;

  std::mt19937_64 rng(scenario.seed);
  std::uniform_real_distribution<double> coord(-side / 2.0, side / 2.0);

  std::vector<Eigen::Vector3d> placed;
  placed.reserve(static_cast<size_t>(n));
  int attempts = 0;
  while (static_cast<int>(placed.size()) < n) {
    if (attempts >= scenario.init.max_attempts) {
      throw InfeasibleDensity(
          "generate_initial: could not place " + std::to_string(n) +
          " robots with separation > " + std::to_string(min_sep) +
          " in a box of side " + std::to_string(side) + " after " +
          std::to_string(attempts) + " attempts");
    }
    ++attempts;
    const Eigen::Vector3d candidate(coord(rng), coord(rng), coord(rng));
    double nearest = std::numeric_limits<double>::infinity();
    for (const Eigen::Vector3d& x : placed) {
      nearest = std::min(nearest, (candidate - x).norm());
    }
    if (nearest <= min_sep) continue;
    if (!placed.empty() && nearest > scenario.potential.range) continue;
    placed.push_back(candidate);
  }

  RobotState state;
  state.positions = std::move(placed);
  state.momenta.assign(static_cast<size_t>(n), Eigen::Vector3d::Zero());
  state.masses = Eigen::VectorXd::Constant(n, scenario.mass);
  state.local_damping = Eigen::VectorXd::Constant(n, scenario.local_damping);
  state.time = 0.0;
  return state;
}

std::optional<Obstacle> resolve_obstacle(const Scenario& scenario,
                                         const RobotState& initial) {
  if (!scenario.init.obstacle_enabled) return std::nullopt;
  Obstacle obstacle;
  obstacle.params = scenario.potential;
  if (scenario.init.obstacle_position) {
    obstacle.position = *scenario.init.obstacle_position;
    return obstacle;
  }
  Eigen::Vector3d axis = scenario.drive_force;
  if (axis.norm() == 0.0) {
    axis = Eigen::Vector3d::UnitX();
  } else {
    axis.normalize();
  }
  // Directly in the path of the leading robot, so the drive reliably brings
  // the swarm into contact.
  size_t leader = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < initial.positions.size(); ++i) {
    const double s = initial.positions[i].dot(axis);
    if (s > best) {
      best = s;
      leader = i;
    }
  }
  obstacle.position =
      initial.positions[leader] + scenario.init.obstacle_clearance * axis;
  return obstacle;
}

DeviationSeries barycenter_deviation(const Trajectory& tunable,
                                     const Trajectory& nominal) {
  if (tunable.records.size() != nominal.records.size()) {
    throw std::invalid_argument(
        "barycenter_deviation: trajectories have different lengths");
  }
  const size_t n = tunable.records.size();
  DeviationSeries dev;
  dev.time.resize(n);
  for (auto& axis : dev.percent) axis.resize(n);
  constexpr double kEps = 1e-9;
  for (size_t k = 0; k < n; ++k) {
    if (tunable.records[k].time != nominal.records[k].time) {
      throw std::invalid_argument(
          "barycenter_deviation: time grids are not aligned at row " +
          std::to_string(k));
    }
    dev.time[k] = tunable.records[k].time;
    for (int a = 0; a < 3; ++a) {
      const double ref = nominal.records[k].barycenter[a];
      dev.percent[static_cast<size_t>(a)][k] =
          100.0 * (tunable.records[k].barycenter[a] - ref) /
          std::max(std::abs(ref), kEps);
    }
  }
  return dev;
}

void write_metrics_csv(const std::string& path, const Trajectory& traj,
                       bool full_state) {
  if (full_state && traj.states.size() != traj.records.size()) {
    throw std::invalid_argument(
        "write_metrics_csv: full-state output needs a trajectory recorded "
        "with record_full");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");

  out << "time,contact_robot,cost_f,alpha_star,gamma,H,H_s,supplied_integral,"
         "margin_p1,margin_p2,bary_x,bary_y,bary_z";
  if (full_state) {
    for (int i = 1; i <= traj.n_robots; ++i) {
      out << ",x_" << i << ",y_" << i << ",z_" << i << ",vx_" << i << ",vy_"
          << i << ",vz_" << i;
    }
  }
  out << "\n";

  for (size_t k = 0; k < traj.records.size(); ++k) {
    const StepRecord& r = traj.records[k];
    // Robot ids are 1-based in files.
    const int contact = r.contact_robot >= 0 ? r.contact_robot + 1 : -1;
    out << format_double(r.time) << ',' << contact << ','
        << format_double(r.cost_f) << ',' << format_double(r.alpha_star) << ','
        << format_double(r.gamma) << ',' << format_double(r.total_energy)
        << ',' << format_double(r.scaled_energy) << ','
        << format_double(r.supplied_integral) << ','
        << format_double(r.margin_nominal) << ','
        << format_double(r.margin_scaled) << ','
        << format_double(r.barycenter[0]) << ','
        << format_double(r.barycenter[1]) << ','
        << format_double(r.barycenter[2]);
    if (full_state) {
      const RobotState& s = traj.states[k];
      for (int i = 0; i < traj.n_robots; ++i) {
        const Eigen::Vector3d& x = s.positions[static_cast<size_t>(i)];
        const Eigen::Vector3d v = s.velocity(i);
        out << ',' << format_double(x[0]) << ',' << format_double(x[1]) << ','
            << format_double(x[2]) << ',' << format_double(v[0]) << ','
            << format_double(v[1]) << ',' << format_double(v[2]);
      }
    }
    out << "\n";
  }
}

void write_summary(const std::string& path, const Trajectory& traj,
                   const Scenario& scenario) {
  const PassivityVerdict p1 = check_passivity_nominal(traj.ledger);
  const PassivityVerdict p2 =
      check_passivity_scaled(traj.ledger, scenario.alpha_bounds);

  long contact_steps = 0;
  double peak_cost = -1.0;
  for (const StepRecord& r : traj.records) {
    if (r.contact_robot >= 0) {
      ++contact_steps;
      peak_cost = std::max(peak_cost, r.cost_f);
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "mode = " << mode_name(traj.mode) << "\n";
  out << "n_robots = " << traj.n_robots << "\n";
  out << "seed = " << scenario.seed << "\n";
  out << "steps = " << traj.records.size() - 1 << "\n";
  out << "dt = " << format_double(traj.dt) << "\n";
  out << "passivity_nominal = " << (p1.passed ? "PASS" : "FAIL") << "\n";
  out << "margin_p1_min = " << format_double(p1.margin) << "\n";
  out << "tol_p1 = " << format_double(p1.tolerance) << "\n";
  out << "passivity_scaled = "
      << (p2.precondition_ok ? (p2.passed ? "PASS" : "FAIL")
                             : "PRECONDITION-VIOLATED")
      << "\n";
  out << "margin_p2_min = " << format_double(p2.margin) << "\n";
  out << "tol_p2 = " << format_double(p2.tolerance) << "\n";
  out << "min_pair_distance = " << format_double(traj.min_pair_distance)
      << "\n";
  if (std::isfinite(traj.min_obstacle_distance)) {
    out << "min_obstacle_distance = "
        << format_double(traj.min_obstacle_distance) << "\n";
  } else {
    out << "min_obstacle_distance = none\n";
  }
  if (contact_steps > 0) {
    out << "peak_cost = " << format_double(peak_cost) << "\n";
  } else {
    out << "peak_cost = none\n";
  }
  out << "contact_steps = " << contact_steps << "\n";
  out << "multiple_contact_steps = " << traj.multiple_contact_steps << "\n";
  const auto first_contact = traj.first_contact_time();
  if (first_contact) {
    out << "first_contact_time = " << format_double(*first_contact) << "\n";
  } else {
    out << "first_contact_time = none\n";
  }
  out << "total_messages = " << traj.total_messages << "\n";
}

int run_experiment(const Scenario& scenario_in, SimMode mode,
                   const std::string& out_dir, const RunOverrides& overrides) {
  Scenario scenario = scenario_in;
  try {
    if (overrides.seed) scenario.seed = *overrides.seed;
    if (overrides.dt) scenario.dt = *overrides.dt;
    if (overrides.steps) {
      scenario.horizon = static_cast<double>(*overrides.steps) * scenario.dt;
    }
    scenario.validate();
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  Trajectory traj;
  std::optional<Obstacle> obstacle;
  try {
    const RobotState initial = generate_initial(scenario);
    obstacle = resolve_obstacle(scenario, initial);
    SimOptions options;
    options.mode = mode;
    options.record_full = overrides.full_state;
    traj = simulate(initial, scenario, obstacle, options);
  } catch (const InfeasibleDensity& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BarrierViolation& e) {
    std::cerr << "physics abort: " << e.what() << "\n";
    return 3;
  } catch (const NumericBlowup& e) {
    std::cerr << "physics abort: " << e.what() << "\n";
    return 3;
  }

  const fs::path dir(out_dir);
  write_metrics_csv((dir / "metrics.csv").string(), traj,
                    overrides.full_state);
  write_summary((dir / "summary.txt").string(), traj, scenario);
  {
    std::ofstream echo(dir / "config_echo.cfg", std::ios::binary);
    echo << scenario_echo(scenario, mode,
                          obstacle ? std::optional<Eigen::Vector3d>(
                                         obstacle->position)
                                   : std::nullopt,
                          overrides.full_state);
  }

  const PassivityVerdict p1 = check_passivity_nominal(traj.ledger);
  const PassivityVerdict p2 =
      check_passivity_scaled(traj.ledger, scenario.alpha_bounds);
  if (!p1.passed || !p2.passed) {
    std::cerr << "passivity certificate failed: margin_p1 = "
              << format_double(p1.margin) << ", margin_p2 = "
              << format_double(p2.margin)
              << (p2.precondition_ok ? "" : " (precondition violated)")
              << "\n";
    return 4;
  }
  return 0;
}

int run_experiment(const std::string& config_path, SimMode mode,
                   const std::string& out_dir, const RunOverrides& overrides) {
  Scenario scenario;
  try {
    scenario = load_scenario(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return run_experiment(scenario, mode, out_dir, overrides);
}

int batch_thread_count() {
  if (const char* env = std::getenv("SWARM_SIM_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) return std::min(requested, 256);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void run_indexed_batch(int n_jobs, const std::function<void(int)>& fn) {
  if (n_jobs <= 0) return;
  const int n_threads = std::min(batch_thread_count(), n_jobs);
  if (n_threads == 1) {
    for (int i = 0; i < n_jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    workers.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n_jobs) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace swarm
