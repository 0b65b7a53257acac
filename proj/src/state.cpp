#include "swarm/state.hpp"

#include <stdexcept>
#include <string>

namespace swarm {

void RobotState::validate() const {
  const int n = size();
  if (n < 1) throw std::invalid_argument("RobotState: empty state");
  if (static_cast<int>(momenta.size()) != n || masses.size() != n ||
      local_damping.size() != n) {
    throw std::invalid_argument("RobotState: inconsistent array sizes");
  }
  for (int i = 0; i < n; ++i) {
    if (!(masses[i] > 0.0)) {
      throw std::invalid_argument("RobotState: mass of robot " +
                                  std::to_string(i) + " must be > 0");
    }
    if (!(local_damping[i] > 0.0)) {
      throw std::invalid_argument("RobotState: local damping of robot " +
                                  std::to_string(i) + " must be > 0");
    }
  }
}

void AlphaBounds::validate() const {
  if (!(0.0 < lower && lower < upper)) {
    throw std::invalid_argument("AlphaBounds: need 0 < lower < upper, got [" +
                                std::to_string(lower) + ", " +
                                std::to_string(upper) + "]");
  }
}

DampingSpec make_damping_spec(const SwarmTopology& topo,
                              const std::vector<Eigen::Vector3d>& positions,
                              double range, double beta_uniform) {
  if (beta_uniform < 0.0) {
    throw std::invalid_argument("make_damping_spec: beta must be >= 0");
  }
  DampingSpec damping;
  damping.beta_edges = Eigen::VectorXd::Zero(topo.n_edges());
  for (int k = 0; k < topo.n_edges(); ++k) {
    const auto [i, j] = topo.edge(k);
    const double d = (positions[static_cast<size_t>(i)] -
                      positions[static_cast<size_t>(j)])
                         .norm();
    if (d <= range) damping.beta_edges[k] = beta_uniform;
  }
  return damping;
}

}  // namespace swarm
