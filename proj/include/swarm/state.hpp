#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "swarm/topology.hpp"

namespace swarm {

// State of the N double integrators. Velocities are always derived as
// p_i / m_i; there is no separate velocity storage.
struct RobotState {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> momenta;
  Eigen::VectorXd masses;         // > 0
  Eigen::VectorXd local_damping;  // b_i > 0
  double time = 0.0;

  int size() const { return static_cast<int>(positions.size()); }

  Eigen::Vector3d velocity(int i) const {
    return momenta[static_cast<size_t>(i)] / masses[i];
  }

  std::vector<Eigen::Vector3d> velocities() const {
    std::vector<Eigen::Vector3d> v(positions.size());
    for (int i = 0; i < size(); ++i) v[static_cast<size_t>(i)] = velocity(i);
    return v;
  }

  Eigen::Vector3d barycenter() const {
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& x : positions) b += x;
    return b / static_cast<double>(positions.size());
  }

  void validate() const;  // throws std::invalid_argument
};

struct AlphaBounds {
  double lower = 1e-4;
  double upper = 1e2;

  bool contains(double a) const { return lower <= a && a <= upper; }
  void validate() const;  // throws std::invalid_argument
};

// Per-edge gains applied to the elastic (alpha) and viscous (c) couplings.
// Gains differ from the baseline only on edges incident to the contact
// robot that are within interaction range.
struct ScalingState {
  Eigen::VectorXd alpha_edges;
  Eigen::VectorXd c_edges;
  AlphaBounds alpha_bounds;
  std::optional<int> contact_robot;

  static ScalingState identity(int n_edges, AlphaBounds bounds = {}) {
    ScalingState s;
    s.alpha_edges = Eigen::VectorXd::Ones(n_edges);
    s.c_edges = Eigen::VectorXd::Ones(n_edges);
    s.alpha_bounds = bounds;
    return s;
  }
};

// Inter-robot damping coefficients per edge; zero whenever the pair is out
// of interaction range.
struct DampingSpec {
  Eigen::VectorXd beta_edges;
};

// Uniform beta on all in-range pairs, re-evaluated from current positions.
DampingSpec make_damping_spec(const SwarmTopology& topo,
                              const std::vector<Eigen::Vector3d>& positions,
                              double range, double beta_uniform);

}  // namespace swarm
