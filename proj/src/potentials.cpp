#include "swarm/potentials.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

void check_barrier(double d, const PotentialParams& p) {
  if (d <= p.delta_s) {
    throw BarrierViolation("pair distance " + std::to_string(d) +
                               " at or below safety distance " +
                               std::to_string(p.delta_s),
                           -1, -1, d);
  }
}

}  // namespace

void PotentialParams::validate() const {
  if (!(0.0 < delta_s && delta_s < delta_d && delta_d < range)) {
    throw std::invalid_argument(
        "PotentialParams: need 0 < delta_s < delta_d < R, got delta_s = " +
        std::to_string(delta_s) + ", delta_d = " + std::to_string(delta_d) +
        ", R = " + std::to_string(range));
  }
  if (k_c <= 0.0) {
    throw std::invalid_argument("PotentialParams: k_c must be > 0");
  }
}

// Force law:
//   dV/dd = k_c (d - delta_d) / (d - delta_s)            delta_s < d <= delta_d
//   dV/dd = k_c (d - delta_d) (R - d) / (R - delta_d)    delta_d <= d <= R
//   dV/dd = 0                                            d > R
// V is its integral with V(delta_d) = 0, continuous everywhere.
double pair_force_magnitude(double d, const PotentialParams& p) {
  check_barrier(d, p);
  if (d >= p.range) return 0.0;
  if (d <= p.delta_d) {
    return p.k_c * (d - p.delta_d) / (d - p.delta_s);
  }
  return p.k_c * (d - p.delta_d) * (p.range - d) / (p.range - p.delta_d);
}

double pair_potential(double d, const PotentialParams& p) {
  check_barrier(d, p);
  const double w = p.range - p.delta_d;
  if (d >= p.range) {
    return p.k_c * w * w / 6.0;  // plateau value
  }
  if (d <= p.delta_d) {
    const double span = p.delta_d - p.delta_s;
    const double t = d - p.delta_d;  // <= 0 on this branch
    // log1p keeps the cancellation error proportional to t^2 near delta_d;
    // the floor absorbs the last-ulp negatives so V >= 0 holds structurally.
    return std::max(0.0, p.k_c * (t - span * std::log1p(t / span)));
  }
  const double t = d - p.delta_d;
  return p.k_c * t * t * (3.0 * w - 2.0 * t) / (6.0 * w);
}

double kappa(double d, const PotentialParams& p) {
  return pair_force_magnitude(d, p) / d;
}

double kappa(const Eigen::Vector3d& x_i, const Eigen::Vector3d& x_j,
             const PotentialParams& p) {
  return kappa((x_i - x_j).norm(), p);
}

Eigen::Vector3d coupling_gradient(const Eigen::Vector3d& x_i,
                                  const Eigen::Vector3d& x_j,
                                  const PotentialParams& p) {
  const Eigen::Vector3d rel = x_i - x_j;
  return kappa(rel.norm(), p) * rel;
}

Eigen::Vector3d obstacle_force(const Eigen::Vector3d& x_i,
                               const Obstacle& obs) {
  const Eigen::Vector3d rel = x_i - obs.position;
  const double d = rel.norm();
  if (d <= obs.params.delta_s) {
    throw BarrierViolation("obstacle distance " + std::to_string(d) +
                               " at or below safety distance " +
                               std::to_string(obs.params.delta_s),
                           -1, -1, d);
  }
  if (d >= obs.params.delta_d) return Eigen::Vector3d::Zero();
  // Negated gradient of the repulsive branch, pointing away from the
  // obstacle; pair_force_magnitude is negative below delta_d.
  return -pair_force_magnitude(d, obs.params) / d * rel;
}

}  // namespace swarm
