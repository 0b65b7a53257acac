#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "swarm/potentials.hpp"
#include "swarm/state.hpp"
#include "swarm/topology.hpp"

namespace swarm {

// Target viscoelastic behavior the contact robot should present to the
// environment.
struct DesiredImpedance {
  double kappa_d = 1.0;      // desired stiffness
  double beta_d = 1.0;       // desired damping
  double rest_length = 1.0;  // Delta, rest length of the equivalent spring
  double rest_speed = 1.0;   // Delta_v, reference speed of the equivalent damper

  void validate() const;  // throws std::invalid_argument
};

// Which expression evaluates the damping scale: the formula as printed
// (residual |v_i - v_bar| in the numerator) or the substituted rest-speed
// form. Both coincide when v_bar comes from equivalent_damper.
enum class GammaForm { Residual, RestLength };

struct ContactDetection {
  std::optional<int> robot;
  bool multiple_contacts = false;  // more than one nonzero F^e (tie-broken)
};

// Index of the unique robot with nonzero environment force; with several,
// the one of maximum norm (lowest index on ties) plus a warning flag.
ContactDetection detect_contact(const std::vector<Eigen::Vector3d>& env_forces);

// Net elastic vector S = sum_j kappa_{i,j} (x_i - x_j) seen by robot i.
Eigen::Vector3d net_elastic_vector(int i, const RobotState& state,
                                   const PotentialParams& params);

// Net viscous vector D = sum_j beta_{i,j} (v_i - v_j) seen by robot i, with
// uniform beta on in-range pairs.
Eigen::Vector3d net_viscous_vector(int i, const RobotState& state,
                                   double beta_uniform, double range);

struct EquivalentSpring {
  Eigen::Vector3d rest_position = Eigen::Vector3d::Zero();  // x_bar
  double kappa_n = 0.0;
};

// Rest position at distance rest_length from x_i opposite the net elastic
// vector, and the stiffness reproducing alpha * S through it. Requires
// |S| > 0.
EquivalentSpring equivalent_spring(const Eigen::Vector3d& x_i,
                                   const Eigen::Vector3d& S,
                                   double rest_length, double alpha);

struct EquivalentDamper {
  Eigen::Vector3d rest_velocity = Eigen::Vector3d::Zero();  // v_bar
  double beta_n = 0.0;
};

// Damper analogue of equivalent_spring. Requires |D| > 0.
EquivalentDamper equivalent_damper(const Eigen::Vector3d& v_i,
                                   const Eigen::Vector3d& D,
                                   double rest_speed, double gamma);

// Single equivalent viscoelastic element seen by the contact robot.
struct EquivalentImpedance {
  Eigen::Vector3d x_bar = Eigen::Vector3d::Zero();
  double kappa_n = 0.0;
  Eigen::Vector3d v_bar = Eigen::Vector3d::Zero();
  double beta_n = 0.0;
  Eigen::Vector3d S = Eigen::Vector3d::Zero();
  Eigen::Vector3d D = Eigen::Vector3d::Zero();
  bool spring_degenerate = false;  // |S| = 0: x_bar, kappa_n not meaningful
  bool damper_degenerate = false;  // |D| = 0: v_bar, beta_n not meaningful
};

// Aggregates the net coupling the contact robot feels into one virtual
// spring/damper pair under the gains currently applied to its edges.
EquivalentImpedance equivalent_impedance(int i, const RobotState& state,
                                         const PotentialParams& params,
                                         double beta_uniform,
                                         const DesiredImpedance& impedance,
                                         double alpha, double gamma);

// Squared distance between the desired elastic force and the scaled net
// elastic force: |kappa_d (x_i - x_bar) - alpha S|^2.
double cost(double alpha, const Eigen::Vector3d& x_i,
            const Eigen::Vector3d& rest_position, double kappa_d,
            const Eigen::Vector3d& S);

struct AlphaSolution {
  double alpha_star = 1.0;
  bool clamped = false;
  bool degenerate = false;  // |S| = 0, alpha held at current value
};

// Exact minimizer of cost() over [bounds.lower, bounds.upper]. With the
// sign-resolved rest position this is clamp(kappa_d * Delta / |S|).
AlphaSolution solve_alpha(const Eigen::Vector3d& x_i,
                          const Eigen::Vector3d& rest_position, double kappa_d,
                          const Eigen::Vector3d& S, const AlphaBounds& bounds,
                          double current_alpha);

struct GammaSolution {
  double gamma = 1.0;
  bool degenerate = false;  // |D| = 0 or cap exceeded, gamma held
};

// Damping scale imposing beta_n = beta_d: gamma = beta_d |v_i - v_bar| / |D|.
// Values above gamma_cap are treated as degenerate (the equivalent damper is
// ill-conditioned when |D| is near zero) and the current gamma is held.
GammaSolution compute_gamma(const Eigen::Vector3d& v_i,
                            const Eigen::Vector3d& v_bar,
                            const Eigen::Vector3d& D, double beta_d,
                            double current_gamma, double gamma_cap,
                            double gamma_floor = 1e-9);

// Rest-length form of the same scale: gamma = beta_d * rest_speed / |D|.
GammaSolution compute_gamma_rest_length(const Eigen::Vector3d& D,
                                        double beta_d, double rest_speed,
                                        double current_gamma, double gamma_cap,
                                        double gamma_floor = 1e-9);

// Writes alpha_star / gamma onto every edge incident to contact robot i that
// is within range, resets all other edges to 1, and stamps contact_robot.
// Returns the number of scaled edges (= broadcast message count). Throws
// std::invalid_argument if alpha_star violates the bounds.
int apply_scaling(ScalingState& scaling, const SwarmTopology& topo,
                  const std::vector<Eigen::Vector3d>& positions, int i,
                  double alpha_star, double gamma, double range);

// One controller recomputation, recorded for diagnostics and tests.
struct ControllerEvent {
  double time = 0.0;
  long step = 0;
  int contact_robot = -1;          // -1: no contact, scales reset
  bool multiple_contacts = false;
  double s_norm = 0.0;
  double d_norm = 0.0;
  double alpha_star = 1.0;
  bool alpha_clamped = false;
  bool spring_degenerate = false;
  double gamma = 1.0;
  bool damper_degenerate = false;
  double kappa_n = 0.0;
  double beta_n = 0.0;
  int messages = 0;                // one value broadcast per scaled edge
};

struct ControllerConfig {
  DesiredImpedance impedance;
  AlphaBounds alpha_bounds;
  PotentialParams potential;
  double beta_uniform = 1.0;
  GammaForm gamma_form = GammaForm::Residual;
  double gamma_cap = 50.0;
  double baseline_gain = 1.0;  // idle elastic gain of the surrounding mode
};

// Periodic recomputation of the contact robot's edge scales. The applied
// values stay frozen between updates; overlay() writes them on top of the
// per-step baseline scaling.
class InteractionController {
public:
  explicit InteractionController(const ControllerConfig& config)
      : config_(config) {
    config_.impedance.validate();
    config_.alpha_bounds.validate();
  }

  ControllerEvent update(long step, const RobotState& state,
                         const SwarmTopology& topo,
                         const std::vector<Eigen::Vector3d>& env_forces);

  void overlay(ScalingState& scaling) const;

  bool contact_active() const { return contact_.has_value(); }
  std::optional<int> contact_robot() const { return contact_; }
  double applied_alpha() const { return alpha_applied_; }
  double applied_gamma() const { return gamma_applied_; }
  long total_messages() const { return total_messages_; }

private:
  ControllerConfig config_;
  std::optional<int> contact_;
  std::vector<int> scaled_edges_;
  double alpha_applied_ = 1.0;
  double gamma_applied_ = 1.0;
  long total_messages_ = 0;
};

}  // namespace swarm
