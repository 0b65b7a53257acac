#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "swarm/interaction_controller.hpp"

using Eigen::Vector3d;
using swarm::AlphaBounds;

namespace {

// Two-stage grid refinement, still a pure evaluation-based argmin. The final
// resolution is below 1e-6 for the bounds used here.
double grid_argmin(const Vector3d& x_i, const Vector3d& x_bar, double kappa_d,
                   const Vector3d& S, const AlphaBounds& bounds,
                   int points = 20000) {
  double lo = bounds.lower;
  double hi = bounds.upper;
  double best = lo;
  for (int stage = 0; stage < 2; ++stage) {
    const double step = (hi - lo) / points;
    double best_value = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= points; ++k) {
      const double alpha = lo + k * step;
      const double value = swarm::cost(alpha, x_i, x_bar, kappa_d, S);
      if (value < best_value) {
        best_value = value;
        best = alpha;
      }
    }
    lo = std::max(bounds.lower, best - step);
    hi = std::min(bounds.upper, best + step);
  }
  return best;
}

}  // namespace

TEST_CASE("detect_contact picks the unique nonzero force") {
  std::vector<Vector3d> forces(10, Vector3d::Zero());
  CHECK_FALSE(swarm::detect_contact(forces).robot.has_value());

  forces[6] = Vector3d(0.0, 0.3, 0.0);
  const auto single = swarm::detect_contact(forces);
  CHECK(single.robot == 6);
  CHECK_FALSE(single.multiple_contacts);
}

TEST_CASE("detect_contact breaks ties by maximum norm with a warning") {
  std::vector<Vector3d> forces(6, Vector3d::Zero());
  forces[2] = Vector3d(2.0, 0.0, 0.0);
  forces[4] = Vector3d(0.0, 1.0, 0.0);
  const auto det = swarm::detect_contact(forces);
  CHECK(det.robot == 2);
  CHECK(det.multiple_contacts);
}

TEST_CASE("equivalent spring reproduces the scaled elastic force") {
  const Vector3d x_i(3.0, -1.0, 2.0);
  const Vector3d S(2.0, 0.0, 0.0);
  const auto spring = swarm::equivalent_spring(x_i, S, 1.0, 1.0);
  CHECK(spring.rest_position == x_i - Vector3d(1.0, 0.0, 0.0));
  CHECK(spring.kappa_n == doctest::Approx(2.0).epsilon(1e-15));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector3d p(unif(rng), unif(rng), unif(rng));
    Vector3d s(unif(rng), unif(rng), unif(rng));
    if (s.norm() < 1e-6) continue;
    const double delta = std::abs(unif(rng)) + 0.1;
    const double alpha = std::abs(unif(rng)) + 0.01;
    const auto eq = swarm::equivalent_spring(p, s, delta, alpha);
    CHECK((p - eq.rest_position).norm() ==
          doctest::Approx(delta).epsilon(1e-12));
    CHECK((eq.kappa_n * (p - eq.rest_position) - alpha * s).norm() <=
          1e-12 * alpha * s.norm());
  }

  CHECK(swarm::equivalent_spring(x_i, S, 1.0, 0.0).kappa_n == 0.0);
  CHECK_THROWS_AS(swarm::equivalent_spring(x_i, Vector3d::Zero(), 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("equivalent damper mirrors the spring construction") {
  const Vector3d v_i(0.5, 0.5, 0.5);
  const Vector3d D(0.0, 4.0, 0.0);
  const auto damper = swarm::equivalent_damper(v_i, D, 1.0, 1.0);
  CHECK(damper.rest_velocity == v_i - Vector3d(0.0, 1.0, 0.0));
  CHECK(damper.beta_n == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(swarm::equivalent_damper(v_i, Vector3d::Zero(), 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("cost: both algebraic forms agree") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  std::uniform_real_distribution<double> alpha_pick(1e-4, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector3d x_i(unif(rng), unif(rng), unif(rng));
    Vector3d S(unif(rng), unif(rng), unif(rng));
    if (S.norm() < 1e-6) continue;
    const double kappa_d = std::abs(unif(rng)) + 0.1;
    const double delta = std::abs(unif(rng)) + 0.1;
    const Vector3d x_bar = x_i - delta / S.norm() * S;
    const double alpha = alpha_pick(rng);

    const double vector_form = swarm::cost(alpha, x_i, x_bar, kappa_d, S);
    const double reduced = kappa_d * delta - alpha * S.norm();
    const double reduced_form = reduced * reduced;
    const double scale = std::max(1.0, std::max(vector_form, reduced_form));
    CHECK(std::abs(vector_form - reduced_form) <= 1e-12 * scale);
  }
}

TEST_CASE("cost at the closed-form minimizer and at zero") {
  const Vector3d x_i(1.0, 1.0, 1.0);
  const Vector3d S(3.0, 0.0, -4.0);  // |S| = 5
  const double kappa_d = 2.0;
  const double delta = 1.5;
  const Vector3d x_bar = x_i - delta / S.norm() * S;

  const double at_min = swarm::cost(kappa_d * delta / S.norm(), x_i, x_bar,
                                    kappa_d, S);
  CHECK(at_min <= 1e-24);
  CHECK(swarm::cost(0.0, x_i, x_bar, kappa_d, S) ==
        doctest::Approx(kappa_d * delta * kappa_d * delta).epsilon(1e-12));
}

TEST_CASE("solve_alpha closed form against the grid oracle") {
  const AlphaBounds bounds{1e-4, 1e2};
  const Vector3d x_i(0.0, 0.0, 0.0);

  // kappa_d = 1, Delta = 1, |S| = 2 -> alpha* = 0.5.
  {
    const Vector3d S(0.0, 2.0, 0.0);
    const Vector3d x_bar = x_i - 1.0 / S.norm() * S;
    const auto sol = swarm::solve_alpha(x_i, x_bar, 1.0, S, bounds, 1.0);
    CHECK(sol.alpha_star == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_FALSE(sol.clamped);
    CHECK_FALSE(sol.degenerate);

    // Single-stage 1e5-point sweep around the box.
    double best = bounds.lower;
    double best_value = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 100000; ++k) {
      const double alpha =
          bounds.lower + k * (bounds.upper - bounds.lower) / 100000.0;
      const double value = swarm::cost(alpha, x_i, x_bar, 1.0, S);
      if (value < best_value) {
        best_value = value;
        best = alpha;
      }
    }
    CHECK(std::abs(sol.alpha_star - best) <=
          (bounds.upper - bounds.lower) / 100000.0);
  }

  // |S| = 0.005 -> unclamped 200, clipped at alpha_M = 100.
  {
    const Vector3d S(0.005, 0.0, 0.0);
    const Vector3d x_bar = x_i - 1.0 / S.norm() * S;
    const auto sol = swarm::solve_alpha(x_i, x_bar, 1.0, S, bounds, 1.0);
    CHECK(sol.alpha_star == 100.0);
    CHECK(sol.clamped);
  }
}

TEST_CASE("solve_alpha on random instances: oracle match and KKT") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::uniform_real_distribution<double> mag(0.05, 4.0);
  const AlphaBounds bounds{1e-4, 1e2};

  for (int trial = 0; trial < 1000; ++trial) {
    const Vector3d x_i(unif(rng), unif(rng), unif(rng));
    Vector3d S(unif(rng), unif(rng), unif(rng));
    if (S.norm() < 1e-3) S = Vector3d(1.0, 0.2, -0.3);
    S *= mag(rng) / S.norm();
    const double kappa_d = mag(rng);
    const double delta = mag(rng);
    const Vector3d x_bar = x_i - delta / S.norm() * S;

    const auto sol = swarm::solve_alpha(x_i, x_bar, kappa_d, S, bounds, 1.0);
    const double oracle = grid_argmin(x_i, x_bar, kappa_d, S, bounds);
    const double resolution = (bounds.upper - bounds.lower) / 20000.0 / 10000.0;
    CHECK(std::abs(sol.alpha_star - oracle) <=
          std::max(resolution, 2.0 * (bounds.upper - bounds.lower) / 2e8));

    if (!sol.clamped) {
      // Interior KKT: df/dalpha = 2 |S| (alpha |S| - kappa_d Delta) = 0.
      const double derivative =
          2.0 * S.norm() * (sol.alpha_star * S.norm() - kappa_d * delta);
      const double scale =
          2.0 * S.norm() * std::max(kappa_d * delta, sol.alpha_star * S.norm());
      CHECK(std::abs(derivative) <= 1e-9 * std::max(scale, 1e-30));
      // Elastic matching for interior solutions.
      CHECK(std::abs(sol.alpha_star * S.norm() - kappa_d * delta) <=
            1e-9 * kappa_d * delta);
    }
  }
}

TEST_CASE("solve_alpha holds the current value on degenerate geometry") {
  const auto sol = swarm::solve_alpha(Vector3d::Zero(), Vector3d::Zero(), 1.0,
                                      Vector3d::Zero(), {1e-4, 1e2}, 7.5);
  CHECK(sol.alpha_star == 7.5);
  CHECK(sol.degenerate);
}

TEST_CASE("compute_gamma imposes the desired damping") {
  const Vector3d v_i(1.0, 0.0, 0.0);
  const Vector3d D(0.0, 0.0, 4.0);
  const double beta_d = 2.0;
  const double rest_speed = 1.0;
  const Vector3d v_bar =
      swarm::equivalent_damper(v_i, D, rest_speed, 1.0).rest_velocity;

  const auto sol = swarm::compute_gamma(v_i, v_bar, D, beta_d, 1.0, 50.0);
  CHECK(sol.gamma == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(sol.degenerate);

  // Closure: applying gamma yields beta_n = beta_d.
  const auto damper = swarm::equivalent_damper(v_i, D, rest_speed, sol.gamma);
  CHECK(damper.beta_n == doctest::Approx(beta_d).epsilon(1e-13));

  // Fixed point: |D| = beta_d * rest_speed makes gamma = 1.
  const Vector3d D_fixed(0.0, beta_d * rest_speed, 0.0);
  const Vector3d v_bar_fixed =
      swarm::equivalent_damper(v_i, D_fixed, rest_speed, 1.0).rest_velocity;
  CHECK(swarm::compute_gamma(v_i, v_bar_fixed, D_fixed, beta_d, 1.0, 50.0)
            .gamma == doctest::Approx(1.0).epsilon(1e-14));

  // Both gamma forms coincide under the analogous construction.
  const auto rest_form = swarm::compute_gamma_rest_length(D, beta_d,
                                                          rest_speed, 1.0,
                                                          50.0);
  CHECK(sol.gamma == doctest::Approx(rest_form.gamma).epsilon(1e-14));
}

TEST_CASE("compute_gamma: scaled viscous force magnitude is beta_d Delta_v") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector3d v_i(unif(rng), unif(rng), unif(rng));
    Vector3d D(unif(rng), unif(rng), unif(rng));
    if (D.norm() < 0.05) continue;
    const double beta_d = std::abs(unif(rng)) + 0.1;
    const double rest_speed = std::abs(unif(rng)) + 0.1;
    const Vector3d v_bar =
        swarm::equivalent_damper(v_i, D, rest_speed, 1.0).rest_velocity;
    const auto sol =
        swarm::compute_gamma(v_i, v_bar, D, beta_d, 1.0, 1e9);
    REQUIRE_FALSE(sol.degenerate);
    CHECK((sol.gamma * D).norm() ==
          doctest::Approx(beta_d * rest_speed).epsilon(1e-12));
  }
}

TEST_CASE("compute_gamma degeneracy: zero D and cap overflow hold current") {
  const Vector3d v_i(1.0, 0.0, 0.0);
  auto sol = swarm::compute_gamma(v_i, v_i, Vector3d::Zero(), 1.0, 3.0, 50.0);
  CHECK(sol.gamma == 3.0);
  CHECK(sol.degenerate);

  // |D| tiny: the raw gamma would exceed the cap.
  const Vector3d D(1e-9, 0.0, 0.0);
  const Vector3d v_bar = swarm::equivalent_damper(v_i, D, 1.0, 1.0)
                             .rest_velocity;
  sol = swarm::compute_gamma(v_i, v_bar, D, 1.0, 3.0, 50.0);
  CHECK(sol.gamma == 3.0);
  CHECK(sol.degenerate);
}

TEST_CASE("apply_scaling touches exactly the in-range contact edges") {
  const int n = 6;
  const swarm::SwarmTopology topo(n);
  swarm::PotentialParams params;  // delta_s 5, delta_d 15, R 22
  const double range = params.range;

  // Robot 0 with three in-range neighbors (1, 2, 3); robots 4, 5 far away.
  std::vector<Vector3d> positions = {
      {0.0, 0.0, 0.0},   {15.0, 0.0, 0.0},  {0.0, 15.0, 0.0},
      {0.0, 0.0, 15.0},  {60.0, 0.0, 0.0},  {0.0, 60.0, 0.0}};

  auto scaling = swarm::ScalingState::identity(topo.n_edges(), {1e-4, 1e2});
  const int messages =
      swarm::apply_scaling(scaling, topo, positions, 0, 0.25, 2.0, range);
  CHECK(messages == 3);
  CHECK(scaling.contact_robot == 0);

  int scaled = 0;
  for (int k = 0; k < topo.n_edges(); ++k) {
    const auto [i, j] = topo.edge(k);
    const bool expect_scaled = i == 0 && j <= 3;
    if (expect_scaled) {
      CHECK(scaling.alpha_edges[k] == 0.25);
      CHECK(scaling.c_edges[k] == 2.0);
      ++scaled;
    } else {
      CHECK(scaling.alpha_edges[k] == 1.0);
      CHECK(scaling.c_edges[k] == 1.0);
    }
  }
  CHECK(scaled == 3);

  CHECK_THROWS_AS(
      swarm::apply_scaling(scaling, topo, positions, 0, 1e3, 1.0, range),
      std::invalid_argument);
}

TEST_CASE("equivalent_impedance reproduces both construction identities") {
  swarm::PotentialParams params;
  swarm::DesiredImpedance imp;
  imp.rest_length = 1.3;
  imp.rest_speed = 0.7;

  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  swarm::RobotState state;
  state.positions = {{0.0, 0.0, 0.0}, {13.0, 2.0, 0.0}, {-1.0, 14.0, 3.0},
                     {6.0, -11.0, 7.0}};
  state.momenta.resize(4);
  for (auto& p : state.momenta) {
    p = Eigen::Vector3d(unif(rng), unif(rng), unif(rng));
  }
  state.masses = Eigen::VectorXd::Ones(4);
  state.local_damping = Eigen::VectorXd::Ones(4);

  const double alpha = 2.5;
  const double gamma = 0.4;
  const auto eq = swarm::equivalent_impedance(0, state, params, 1.0, imp,
                                              alpha, gamma);
  REQUIRE_FALSE(eq.spring_degenerate);
  REQUIRE_FALSE(eq.damper_degenerate);

  const Eigen::Vector3d x_i = state.positions[0];
  const Eigen::Vector3d v_i = state.velocity(0);
  CHECK((x_i - eq.x_bar).norm() ==
        doctest::Approx(imp.rest_length).epsilon(1e-12));
  CHECK((eq.kappa_n * (x_i - eq.x_bar) - alpha * eq.S).norm() <=
        1e-12 * (alpha * eq.S).norm());
  CHECK((v_i - eq.v_bar).norm() ==
        doctest::Approx(imp.rest_speed).epsilon(1e-12));
  CHECK((eq.beta_n * (v_i - eq.v_bar) - gamma * eq.D).norm() <=
        1e-12 * (gamma * eq.D).norm());
}

TEST_CASE("apply_scaling reverts edges whose pair left the range") {
  const swarm::SwarmTopology topo(3);
  swarm::PotentialParams params;
  std::vector<Eigen::Vector3d> positions = {
      {0.0, 0.0, 0.0}, {14.0, 0.0, 0.0}, {0.0, 14.0, 0.0}};
  auto scaling = swarm::ScalingState::identity(topo.n_edges(), {1e-4, 1e2});

  CHECK(swarm::apply_scaling(scaling, topo, positions, 0, 0.5, 2.0,
                             params.range) == 2);
  CHECK(scaling.alpha_edges[topo.edge_index(0, 1)] == 0.5);
  CHECK(scaling.alpha_edges[topo.edge_index(0, 2)] == 0.5);

  positions[1][0] = 40.0;  // neighbor 1 leaves the interaction range
  CHECK(swarm::apply_scaling(scaling, topo, positions, 0, 0.5, 2.0,
                             params.range) == 1);
  CHECK(scaling.alpha_edges[topo.edge_index(0, 1)] == 1.0);
  CHECK(scaling.c_edges[topo.edge_index(0, 1)] == 1.0);
  CHECK(scaling.alpha_edges[topo.edge_index(0, 2)] == 0.5);
}
