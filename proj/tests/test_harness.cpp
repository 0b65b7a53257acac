#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "swarm/errors.hpp"
#include "swarm/harness.hpp"

using swarm::Scenario;

namespace fs = std::filesystem;

namespace {

const char* kMinimalConfig =
    "n_robots = 6\n"
    "potential.delta_s = 5\n"
    "potential.delta_d = 15\n"
    "potential.R = 22\n";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("swarm_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing applies defaults and validates") {
  const Scenario s = swarm::parse_scenario(kMinimalConfig);
  CHECK(s.n_robots == 6);
  CHECK(s.potential.range == 22.0);
  CHECK(s.potential.k_c == 1.0);
  CHECK(s.alpha_nominal == 30.0);
  CHECK(s.alpha_bounds.lower == 1e-4);
  CHECK(s.alpha_bounds.upper == 1e2);
  CHECK(s.dt == 1e-3);
  CHECK(s.t_bar == 1e-2);  // 10 dt
  CHECK(s.impedance.kappa_d == 1.0);
  CHECK(s.idle_gain(swarm::SimMode::Tunable) == 1.0);
  CHECK(s.idle_gain(swarm::SimMode::TunableFromNominal) == 30.0);
}

TEST_CASE("config errors name the offending field") {
  const std::string no_range =
      "n_robots = 6\n"
      "potential.delta_s = 5\n"
      "potential.delta_d = 15\n";
  try {
    swarm::parse_scenario(no_range, "test.cfg");
    FAIL("expected ConfigError");
  } catch (const swarm::ConfigError& e) {
    CHECK(std::string(e.what()).find("potential.R") != std::string::npos);
  }

  const std::string unknown = std::string(kMinimalConfig) + "potental.kc = 2\n";
  try {
    swarm::parse_scenario(unknown, "test.cfg");
    FAIL("expected ConfigError");
  } catch (const swarm::ConfigError& e) {
    CHECK(std::string(e.what()).find("potental.kc") != std::string::npos);
    CHECK(std::string(e.what()).find("test.cfg:5") != std::string::npos);
  }

  const std::string zero_horizon =
      std::string(kMinimalConfig) + "sim.horizon = 0\n";
  CHECK_THROWS_AS(swarm::parse_scenario(zero_horizon), swarm::ConfigError);

  const std::string bad_number =
      std::string(kMinimalConfig) + "sim.dt = fast\n";
  CHECK_THROWS_AS(swarm::parse_scenario(bad_number), swarm::ConfigError);
}

TEST_CASE("config accepts comments and explicit obstacle placement") {
  const std::string text = std::string(kMinimalConfig) +
                           "# comment line\n"
                           "obstacle.x = 40  # trailing comment\n"
                           "obstacle.y = 0\n"
                           "obstacle.z = 1.5\n"
                           "controller.gamma_form = rest_length\n";
  const Scenario s = swarm::parse_scenario(text);
  REQUIRE(s.init.obstacle_position.has_value());
  CHECK((*s.init.obstacle_position)[0] == 40.0);
  CHECK((*s.init.obstacle_position)[2] == 1.5);
  CHECK(s.gamma_form == swarm::GammaForm::RestLength);

  const std::string partial = std::string(kMinimalConfig) + "obstacle.x = 4\n";
  CHECK_THROWS_AS(swarm::parse_scenario(partial), swarm::ConfigError);
}

TEST_CASE("generate_initial is deterministic and respects the barrier") {
  Scenario s = swarm::parse_scenario(kMinimalConfig);
  s.n_robots = 16;
  s.seed = 7;
  const auto a = swarm::generate_initial(s);
  const auto b = swarm::generate_initial(s);
  REQUIRE(a.positions.size() == 16);
  for (size_t i = 0; i < a.positions.size(); ++i) {
    CHECK(a.positions[i] == b.positions[i]);
    CHECK(a.momenta[i].norm() == 0.0);
  }
  for (size_t i = 0; i < a.positions.size(); ++i) {
    double nearest = 1e18;
    for (size_t j = 0; j < a.positions.size(); ++j) {
      if (i == j) continue;
      nearest = std::min(nearest, (a.positions[i] - a.positions[j]).norm());
    }
    CHECK(nearest > 5.0);                // above delta_s
    CHECK(nearest <= s.potential.range); // someone in interaction range
  }
}

TEST_CASE("generate_initial fails cleanly when the box is too dense") {
  Scenario s = swarm::parse_scenario(kMinimalConfig);
  s.n_robots = 50;
  s.init.box_side = 12.0;  // cannot hold 50 robots at separation > 6
  CHECK_THROWS_AS(swarm::generate_initial(s), swarm::InfeasibleDensity);
}

TEST_CASE("resolve_obstacle sits ahead of the swarm on the drive axis") {
  Scenario s = swarm::parse_scenario(kMinimalConfig);
  s.n_robots = 8;
  s.seed = 3;
  const auto initial = swarm::generate_initial(s);
  const auto obstacle = swarm::resolve_obstacle(s, initial);
  REQUIRE(obstacle.has_value());
  double foremost = -1e18;
  for (const auto& x : initial.positions) foremost = std::max(foremost, x[0]);
  CHECK(obstacle->position[0] ==
        doctest::Approx(foremost + s.init.obstacle_clearance));
  for (const auto& x : initial.positions) {
    CHECK((x - obstacle->position).norm() > s.potential.delta_d);
  }

  s.init.obstacle_enabled = false;
  CHECK_FALSE(swarm::resolve_obstacle(s, initial).has_value());
}

TEST_CASE("barycenter_deviation on identical trajectories is zero") {
  Scenario s = swarm::parse_scenario(kMinimalConfig);
  s.n_robots = 4;
  s.horizon = 0.05;
  s.init.obstacle_enabled = false;
  const auto initial = swarm::generate_initial(s);
  const auto traj = swarm::simulate(initial, s, std::nullopt, {});
  const auto dev = swarm::barycenter_deviation(traj, traj);
  for (int a = 0; a < 3; ++a) {
    for (const double value : dev.percent[static_cast<size_t>(a)]) {
      CHECK(value == 0.0);
    }
  }

  Scenario shorter = s;
  shorter.horizon = 0.04;
  const auto other = swarm::simulate(initial, shorter, std::nullopt, {});
  CHECK_THROWS_AS(swarm::barycenter_deviation(traj, other),
                  std::invalid_argument);
}

TEST_CASE("run_experiment writes the artifact set and is bit-exact") {
  const fs::path dir = fresh_dir("run");
  const fs::path config_path = dir / "scenario.cfg";
  {
    std::ofstream config(config_path);
    config << kMinimalConfig << "sim.horizon = 0.2\nsim.seed = 5\n";
  }

  swarm::RunOverrides overrides;
  const int code = swarm::run_experiment(config_path.string(),
                                         swarm::SimMode::TunableFromNominal,
                                         (dir / "a").string(), overrides);
  CHECK(code == 0);
  CHECK(fs::exists(dir / "a" / "metrics.csv"));
  CHECK(fs::exists(dir / "a" / "summary.txt"));
  CHECK(fs::exists(dir / "a" / "config_echo.cfg"));

  const int code2 = swarm::run_experiment(config_path.string(),
                                          swarm::SimMode::TunableFromNominal,
                                          (dir / "b").string(), overrides);
  CHECK(code2 == 0);
  CHECK(read_file(dir / "a" / "metrics.csv") ==
        read_file(dir / "b" / "metrics.csv"));

  const std::string csv = read_file(dir / "a" / "metrics.csv");
  CHECK(csv.rfind("time,contact_robot,cost_f,alpha_star,gamma,H,H_s,"
                  "supplied_integral,margin_p1,margin_p2,bary_x,bary_y,"
                  "bary_z\n",
                  0) == 0);

  // Sentinel discipline: cost_f = -1 exactly on no-contact rows.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string time_s, contact_s, cost_s;
    std::getline(cells, time_s, ',');
    std::getline(cells, contact_s, ',');
    std::getline(cells, cost_s, ',');
    if (contact_s == "-1") {
      CHECK(cost_s == "-1");
    } else {
      CHECK(std::stod(cost_s) >= 0.0);
    }
    ++rows;
  }
  CHECK(rows == 201);

  const std::string summary = read_file(dir / "a" / "summary.txt");
  CHECK(summary.find("passivity_nominal = PASS") != std::string::npos);
  CHECK(summary.find("passivity_scaled = PASS") != std::string::npos);
}

TEST_CASE("run_experiment exit codes") {
  const fs::path dir = fresh_dir("codes");

  // Unreadable config.
  CHECK(swarm::run_experiment((dir / "missing.cfg").string(),
                              swarm::SimMode::Nominal, (dir / "x").string(),
                              {}) == 2);

  // Infeasible density.
  const fs::path dense = dir / "dense.cfg";
  {
    std::ofstream config(dense);
    config << "n_robots = 50\npotential.delta_s = 5\n"
           << "potential.delta_d = 15\npotential.R = 22\n"
           << "init.box_side = 12\n";
  }
  CHECK(swarm::run_experiment(dense.string(), swarm::SimMode::Nominal,
                              (dir / "y").string(), {}) == 2);
}

TEST_CASE("full-state CSV carries per-robot blocks") {
  const fs::path dir = fresh_dir("full");
  const fs::path config_path = dir / "scenario.cfg";
  {
    std::ofstream config(config_path);
    config << "n_robots = 3\npotential.delta_s = 5\n"
           << "potential.delta_d = 15\npotential.R = 22\n"
           << "sim.horizon = 0.01\n";
  }
  swarm::RunOverrides overrides;
  overrides.full_state = true;
  CHECK(swarm::run_experiment(config_path.string(), swarm::SimMode::Nominal,
                              (dir / "out").string(), overrides) == 0);
  const std::string csv = read_file(dir / "out" / "metrics.csv");
  CHECK(csv.find(",x_1,y_1,z_1,vx_1,vy_1,vz_1,") != std::string::npos);
  CHECK(csv.find(",x_3,y_3,z_3,vx_3,vy_3,vz_3\n") != std::string::npos);
}

TEST_CASE("steps and dt overrides reshape the run") {
  const fs::path dir = fresh_dir("overrides");
  const fs::path config_path = dir / "scenario.cfg";
  {
    std::ofstream config(config_path);
    config << kMinimalConfig;
  }
  swarm::RunOverrides overrides;
  overrides.steps = 50;
  overrides.dt = 2e-3;
  CHECK(swarm::run_experiment(config_path.string(), swarm::SimMode::Nominal,
                              (dir / "out").string(), overrides) == 0);
  const std::string csv = read_file(dir / "out" / "metrics.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 52);  // header + 51 rows
  const std::string echo = read_file(dir / "out" / "config_echo.cfg");
  CHECK(echo.find("sim.dt = 0.002") != std::string::npos);
}

TEST_CASE("batch helpers honor the thread cap") {
  CHECK(swarm::batch_thread_count() >= 1);
  std::vector<int> hits(97, 0);
  swarm::run_indexed_batch(97, [&](int i) { hits[static_cast<size_t>(i)]++; });
  for (const int h : hits) CHECK(h == 1);
}

TEST_CASE("run_experiment surfaces physics aborts as exit code 3") {
  Scenario s = swarm::parse_scenario(kMinimalConfig);
  s.n_robots = 2;
  s.seed = 4;
  s.horizon = 1.0;
  const auto initial = swarm::generate_initial(s);
  // Obstacle dropped on top of a sampled robot: barrier violation at step 0.
  s.init.obstacle_position =
      initial.positions[0] + Eigen::Vector3d(0.1, 0.0, 0.0);

  const fs::path dir = fresh_dir("abort");
  CHECK(swarm::run_experiment(s, swarm::SimMode::Nominal,
                              (dir / "out").string(), {}) == 3);
}

TEST_CASE("a failing scaled certificate fails the harness exit status") {
  // In-bounds run that genuinely breaks the kinetic-only margin: a
  // compressed pair at rest relaxes and shoves one robot into the obstacle
  // field, storing more energy there than the zero initial kinetic budget.
  Scenario base = swarm::parse_scenario(kMinimalConfig);
  base.n_robots = 2;
  base.drive_force.setZero();
  base.local_damping = 0.3;
  base.horizon = 4.0;
  base.init.box_side = 10.0;

  bool found = false;
  for (unsigned long seed = 0; seed < 60 && !found; ++seed) {
    Scenario s = base;
    s.seed = seed;
    const auto initial = swarm::generate_initial(s);
    const Eigen::Vector3d relative =
        initial.positions[0] - initial.positions[1];
    const double d = relative.norm();
    if (d > 11.0) continue;  // needs a strongly compressed pair
    s.init.obstacle_position =
        initial.positions[0] + 16.0 / d * relative;

    const fs::path dir = fresh_dir("cert_fail");
    const int code = swarm::run_experiment(s, swarm::SimMode::Tunable,
                                           (dir / "out").string(), {});
    if (code == 4) {
      found = true;
      const std::string summary = read_file(dir / "out" / "summary.txt");
      CHECK(summary.find("passivity_scaled = FAIL") != std::string::npos);
      CHECK(summary.find("passivity_nominal = PASS") != std::string::npos);
    }
  }
  CHECK(found);
}
