#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

// Configuration file or scenario validation problem. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A pairwise or robot-obstacle distance reached the safety distance delta_s.
// The integration step was too large for the dynamics; the run must abort
// rather than clamp. CLI exit code 3.
class BarrierViolation : public std::runtime_error {
public:
  BarrierViolation(const std::string& what, int robot_a, int robot_b,
                   double distance, long step = -1)
      : std::runtime_error(what),
        robot_a(robot_a),
        robot_b(robot_b),
        distance(distance),
        step(step) {}

  int robot_a;      // 0-based; -1 if unknown
  int robot_b;      // 0-based; -1 means the obstacle
  double distance;
  long step;        // -1 if outside a simulation loop
};

// Non-finite force or state component. CLI exit code 3.
class NumericBlowup : public std::runtime_error {
public:
  NumericBlowup(const std::string& what, int robot, long step = -1)
      : std::runtime_error(what), robot(robot), step(step) {}

  int robot;
  long step;
};

// Initial-condition sampler ran out of attempts. CLI exit code 2.
class InfeasibleDensity : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace swarm
