#pragma once

#include <Eigen/Dense>

namespace swarm {

// Parameters of the inter-robot coupling potential. The potential has a hard
// barrier at delta_s, its global minimum at delta_d, and saturates to a
// constant beyond the interaction range.
struct PotentialParams {
  double delta_s = 5.0;  // safety distance, V diverges here
  double delta_d = 15.0; // desired inter-robot distance, V = 0
  double range = 22.0;   // interaction range R, zero force beyond
  double k_c = 1.0;      // force gain

  void validate() const;  // throws std::invalid_argument
};

// V(d) >= 0. Strictly decreasing on (delta_s, delta_d), strictly increasing
// on (delta_d, range), constant for d >= range. Throws BarrierViolation for
// d <= delta_s.
double pair_potential(double d, const PotentialParams& p);

// dV/dd. Negative (repulsive) below delta_d, positive (attractive) on
// (delta_d, range), zero at delta_d and for d >= range. Continuous, and
// diverges to -inf as d -> delta_s+.
double pair_force_magnitude(double d, const PotentialParams& p);

// Scalar factor with grad_{x_i} V = kappa * (x_i - x_j), i.e. dV/dd / d.
double kappa(double d, const PotentialParams& p);
double kappa(const Eigen::Vector3d& x_i, const Eigen::Vector3d& x_j,
             const PotentialParams& p);

// grad_{x_i} V(|x_i - x_j|). Antisymmetric under swapping the arguments.
Eigen::Vector3d coupling_gradient(const Eigen::Vector3d& x_i,
                                  const Eigen::Vector3d& x_j,
                                  const PotentialParams& p);

struct Obstacle {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  PotentialParams params;  // repulsive branch is reused
};

// Repulsive force the obstacle exerts on a robot at x_i. Zero at distances
// >= delta_d, diverging as the distance approaches delta_s.
Eigen::Vector3d obstacle_force(const Eigen::Vector3d& x_i, const Obstacle& obs);

}  // namespace swarm
