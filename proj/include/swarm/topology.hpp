#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace swarm {

// Complete-graph bookkeeping over N robots. The N(N-1)/2 undirected edges
// (i, j), i < j, are stored in lexicographic order; that ordering fixes the
// layout of every stacked per-edge vector in the library. Indices are
// 0-based in code; CSV output and docs use 1-based robot ids.
class SwarmTopology {
public:
  explicit SwarmTopology(int n_robots);

  int n_robots() const { return n_robots_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edge_list() const { return edges_; }
  std::pair<int, int> edge(int k) const { return edges_[static_cast<size_t>(k)]; }

  // Position of (i, j) in lexicographic edge order. Requires 0 <= i < j < N;
  // callers normalize unordered pairs first.
  int edge_index(int i, int j) const;

  // N x n_edges matrix with +1 at row i and -1 at row j for edge (i, j).
  Eigen::MatrixXd incidence() const;

  // incidence * diag(edge_weights) * incidence^T. Symmetric PSD with zero
  // row sums. Weights must be nonnegative.
  Eigen::MatrixXd weighted_laplacian(const Eigen::VectorXd& edge_weights) const;

private:
  int n_robots_;
  std::vector<std::pair<int, int>> edges_;
};

struct Neighborhood {
  int robot_id = 0;
  std::vector<int> neighbor_ids;  // ascending
};

// Closed-ball proximity: j is a neighbor of i iff j != i and
// |x_i - x_j| <= range. The relation is symmetric and irreflexive.
std::vector<Neighborhood> neighborhoods(
    const std::vector<Eigen::Vector3d>& positions, double range);

}  // namespace swarm
