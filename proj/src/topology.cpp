#include "swarm/topology.hpp"

#include <stdexcept>
#include <string>

namespace swarm {

SwarmTopology::SwarmTopology(int n_robots) : n_robots_(n_robots) {
  if (n_robots < 1) {
    throw std::invalid_argument("SwarmTopology: n_robots must be >= 1, got " +
                                std::to_string(n_robots));
  }
  edges_.reserve(static_cast<size_t>(n_robots) * (n_robots - 1) / 2);
  for (int i = 0; i < n_robots; ++i) {
    for (int j = i + 1; j < n_robots; ++j) {
      edges_.emplace_back(i, j);
    }
  }
}

int SwarmTopology::edge_index(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_robots_ || j >= n_robots_ || i >= j) {
    throw std::invalid_argument("edge_index: invalid pair (" +
                                std::to_string(i) + ", " + std::to_string(j) +
                                ") for N = " + std::to_string(n_robots_));
  }
  // Row i starts after the (N-1) + (N-2) + ... + (N-i) edges of lower rows.
  return i * (2 * n_robots_ - i - 1) / 2 + (j - i - 1);
}

Eigen::MatrixXd SwarmTopology::incidence() const {
  Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(n_robots_, n_edges());
  for (int k = 0; k < n_edges(); ++k) {
    const auto [i, j] = edges_[static_cast<size_t>(k)];
    inc(i, k) = 1.0;
    inc(j, k) = -1.0;
  }
  return inc;
}

Eigen::MatrixXd SwarmTopology::weighted_laplacian(
    const Eigen::VectorXd& edge_weights) const {
  if (edge_weights.size() != n_edges()) {
    throw std::invalid_argument(
        "weighted_laplacian: expected " + std::to_string(n_edges()) +
        " weights, got " + std::to_string(edge_weights.size()));
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n_robots_, n_robots_);
  for (int k = 0; k < n_edges(); ++k) {
    const double w = edge_weights[k];
    if (w < 0.0) {
      throw std::invalid_argument("weighted_laplacian: negative weight " +
                                  std::to_string(w) + " on edge " +
                                  std::to_string(k));
    }
    const auto [i, j] = edges_[static_cast<size_t>(k)];
    lap(i, i) += w;
    lap(j, j) += w;
    lap(i, j) -= w;
    lap(j, i) -= w;
  }
  return lap;
}

std::vector<Neighborhood> neighborhoods(
    const std::vector<Eigen::Vector3d>& positions, double range) {
  if (range <= 0.0) {
    throw std::invalid_argument("neighborhoods: range must be > 0");
  }
  const int n = static_cast<int>(positions.size());
  std::vector<Neighborhood> result(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    result[static_cast<size_t>(i)].robot_id = i;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (positions[static_cast<size_t>(i)] -
                        positions[static_cast<size_t>(j)])
                           .norm();
      if (d <= range) {
        result[static_cast<size_t>(i)].neighbor_ids.push_back(j);
        result[static_cast<size_t>(j)].neighbor_ids.push_back(i);
      }
    }
  }
  return result;
}

}  // namespace swarm
