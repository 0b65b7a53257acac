#include "swarm/interaction_controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace swarm {

namespace {

std::vector<int> in_range_incident_edges(
    const SwarmTopology& topo, const std::vector<Eigen::Vector3d>& positions,
    int i, double range) {
  std::vector<int> edges;
  for (int j = 0; j < topo.n_robots(); ++j) {
    if (j == i) continue;
    const double d = (positions[static_cast<size_t>(i)] -
                      positions[static_cast<size_t>(j)])
                         .norm();
    if (d <= range) {
      edges.push_back(topo.edge_index(std::min(i, j), std::max(i, j)));
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace

void DesiredImpedance::validate() const {
  if (!(kappa_d > 0.0 && beta_d > 0.0 && rest_length > 0.0 &&
        rest_speed > 0.0)) {
    throw std::invalid_argument(
        "DesiredImpedance: kappa_d, beta_d, Delta and Delta_v must all be "
        "> 0");
  }
}

ContactDetection detect_contact(
    const std::vector<Eigen::Vector3d>& env_forces) {
  ContactDetection det;
  int count = 0;
  double best_norm = 0.0;
  for (int i = 0; i < static_cast<int>(env_forces.size()); ++i) {
    const double n = env_forces[static_cast<size_t>(i)].norm();
    if (n > 0.0) {
      ++count;
      if (n > best_norm) {
        best_norm = n;
        det.robot = i;
      }
    }
  }
  det.multiple_contacts = count > 1;
  return det;
}

Eigen::Vector3d net_elastic_vector(int i, const RobotState& state,
                                   const PotentialParams& params) {
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  const Eigen::Vector3d& x_i = state.positions[static_cast<size_t>(i)];
  for (int j = 0; j < state.size(); ++j) {
    if (j == i) continue;
    const Eigen::Vector3d rel = x_i - state.positions[static_cast<size_t>(j)];
    s += kappa(rel.norm(), params) * rel;
  }
  return s;
}

Eigen::Vector3d net_viscous_vector(int i, const RobotState& state,
                                   double beta_uniform, double range) {
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  const Eigen::Vector3d v_i = state.velocity(i);
  for (int j = 0; j < state.size(); ++j) {
    if (j == i) continue;
    const double dist = (state.positions[static_cast<size_t>(i)] -
                         state.positions[static_cast<size_t>(j)])
                            .norm();
    if (dist <= range) d += beta_uniform * (v_i - state.velocity(j));
  }
  return d;
}

EquivalentSpring equivalent_spring(const Eigen::Vector3d& x_i,
                                   const Eigen::Vector3d& S,
                                   double rest_length, double alpha) {
  const double s_norm = S.norm();
  if (s_norm == 0.0) {
    throw std::invalid_argument("equivalent_spring: degenerate, |S| = 0");
  }
  EquivalentSpring spring;
  spring.rest_position = x_i - rest_length / s_norm * S;
  spring.kappa_n = alpha * s_norm / rest_length;
  return spring;
}

EquivalentDamper equivalent_damper(const Eigen::Vector3d& v_i,
                                   const Eigen::Vector3d& D, double rest_speed,
                                   double gamma) {
  const double d_norm = D.norm();
  if (d_norm == 0.0) {
    throw std::invalid_argument("equivalent_damper: degenerate, |D| = 0");
  }
  EquivalentDamper damper;
  damper.rest_velocity = v_i - rest_speed / d_norm * D;
  damper.beta_n = gamma * d_norm / rest_speed;
  return damper;
}

EquivalentImpedance equivalent_impedance(int i, const RobotState& state,
                                         const PotentialParams& params,
                                         double beta_uniform,
                                         const DesiredImpedance& impedance,
                                         double alpha, double gamma) {
  EquivalentImpedance eq;
  eq.S = net_elastic_vector(i, state, params);
  eq.D = net_viscous_vector(i, state, beta_uniform, params.range);
  if (eq.S.norm() > 0.0) {
    const EquivalentSpring spring =
        equivalent_spring(state.positions[static_cast<size_t>(i)], eq.S,
                          impedance.rest_length, alpha);
    eq.x_bar = spring.rest_position;
    eq.kappa_n = spring.kappa_n;
  } else {
    eq.spring_degenerate = true;
  }
  if (eq.D.norm() > 0.0) {
    const EquivalentDamper damper =
        equivalent_damper(state.velocity(i), eq.D, impedance.rest_speed,
                          gamma);
    eq.v_bar = damper.rest_velocity;
    eq.beta_n = damper.beta_n;
  } else {
    eq.damper_degenerate = true;
  }
  return eq;
}

double cost(double alpha, const Eigen::Vector3d& x_i,
            const Eigen::Vector3d& rest_position, double kappa_d,
            const Eigen::Vector3d& S) {
  return (kappa_d * (x_i - rest_position) - alpha * S).squaredNorm();
}

AlphaSolution solve_alpha(const Eigen::Vector3d& x_i,
                          const Eigen::Vector3d& rest_position, double kappa_d,
                          const Eigen::Vector3d& S, const AlphaBounds& bounds,
                          double current_alpha) {
  bounds.validate();
  AlphaSolution sol;
  const double s2 = S.squaredNorm();
  if (s2 == 0.0) {
    sol.alpha_star = current_alpha;
    sol.degenerate = true;
    return sol;
  }
  // Unconstrained least-squares minimizer, then box projection.
  const double unclamped = kappa_d * (x_i - rest_position).dot(S) / s2;
  sol.alpha_star = std::clamp(unclamped, bounds.lower, bounds.upper);
  sol.clamped = sol.alpha_star != unclamped;
  return sol;
}

GammaSolution compute_gamma(const Eigen::Vector3d& v_i,
                            const Eigen::Vector3d& v_bar,
                            const Eigen::Vector3d& D, double beta_d,
                            double current_gamma, double gamma_cap,
                            double gamma_floor) {
  GammaSolution sol;
  const double d_norm = D.norm();
  if (d_norm == 0.0) {
    sol.gamma = current_gamma;
    sol.degenerate = true;
    return sol;
  }
  const double raw = beta_d * (v_i - v_bar).norm() / d_norm;
  if (!(raw <= gamma_cap)) {
    sol.gamma = current_gamma;
    sol.degenerate = true;
    return sol;
  }
  sol.gamma = std::max(raw, gamma_floor);
  return sol;
}

GammaSolution compute_gamma_rest_length(const Eigen::Vector3d& D,
                                        double beta_d, double rest_speed,
                                        double current_gamma, double gamma_cap,
                                        double gamma_floor) {
  GammaSolution sol;
  const double d_norm = D.norm();
  if (d_norm == 0.0) {
    sol.gamma = current_gamma;
    sol.degenerate = true;
    return sol;
  }
  const double raw = beta_d * rest_speed / d_norm;
  if (!(raw <= gamma_cap)) {
    sol.gamma = current_gamma;
    sol.degenerate = true;
    return sol;
  }
  sol.gamma = std::max(raw, gamma_floor);
  return sol;
}

int apply_scaling(ScalingState& scaling, const SwarmTopology& topo,
                  const std::vector<Eigen::Vector3d>& positions, int i,
                  double alpha_star, double gamma, double range) {
  if (!scaling.alpha_bounds.contains(alpha_star)) {
    throw std::invalid_argument(
        "apply_scaling: alpha_star = " + std::to_string(alpha_star) +
        " outside certificate bounds [" +
        std::to_string(scaling.alpha_bounds.lower) + ", " +
        std::to_string(scaling.alpha_bounds.upper) + "]");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("apply_scaling: gamma must be > 0");
  }
  scaling.alpha_edges.setOnes();
  scaling.c_edges.setOnes();
  const auto edges = in_range_incident_edges(topo, positions, i, range);
  for (const int k : edges) {
    scaling.alpha_edges[k] = alpha_star;
    scaling.c_edges[k] = gamma;
  }
  scaling.contact_robot = i;
  return static_cast<int>(edges.size());
}

ControllerEvent InteractionController::update(
    long step, const RobotState& state, const SwarmTopology& topo,
    const std::vector<Eigen::Vector3d>& env_forces) {
  ControllerEvent event;
  event.time = state.time;
  event.step = step;

  const ContactDetection det = detect_contact(env_forces);
  event.multiple_contacts = det.multiple_contacts;
  if (!det.robot) {
    contact_.reset();
    scaled_edges_.clear();
    alpha_applied_ = 1.0;
    gamma_applied_ = 1.0;
    return event;
  }

  const int i = *det.robot;
  event.contact_robot = i;
  const double current_alpha =
      contact_ ? alpha_applied_ : config_.baseline_gain;
  const double current_gamma = contact_ ? gamma_applied_ : 1.0;

  const DesiredImpedance& imp = config_.impedance;
  const EquivalentImpedance eq =
      equivalent_impedance(i, state, config_.potential, config_.beta_uniform,
                           imp, current_alpha, current_gamma);
  event.s_norm = eq.S.norm();
  event.d_norm = eq.D.norm();
  event.kappa_n = eq.kappa_n;

  double alpha_star;
  if (!eq.spring_degenerate) {
    const AlphaSolution sol =
        solve_alpha(state.positions[static_cast<size_t>(i)], eq.x_bar,
                    imp.kappa_d, eq.S, config_.alpha_bounds, current_alpha);
    alpha_star = sol.alpha_star;
    event.alpha_clamped = sol.clamped;
  } else {
    event.spring_degenerate = true;
    alpha_star = current_alpha;
  }
  // A held value may come from the idle baseline; keep it certifiable.
  alpha_star = std::clamp(alpha_star, config_.alpha_bounds.lower,
                          config_.alpha_bounds.upper);
  event.alpha_star = alpha_star;

  const Eigen::Vector3d v_i = state.velocity(i);
  GammaSolution gamma_sol;
  if (!eq.damper_degenerate) {
    if (config_.gamma_form == GammaForm::Residual) {
      gamma_sol = compute_gamma(v_i, eq.v_bar, eq.D, imp.beta_d,
                                current_gamma, config_.gamma_cap);
    } else {
      gamma_sol = compute_gamma_rest_length(eq.D, imp.beta_d, imp.rest_speed,
                                            current_gamma, config_.gamma_cap);
    }
    event.beta_n =
        equivalent_damper(v_i, eq.D, imp.rest_speed, gamma_sol.gamma).beta_n;
  } else {
    gamma_sol.gamma = current_gamma;
    gamma_sol.degenerate = true;
  }
  event.damper_degenerate = gamma_sol.degenerate;
  event.gamma = gamma_sol.gamma;

  contact_ = i;
  alpha_applied_ = alpha_star;
  gamma_applied_ = gamma_sol.gamma;
  scaled_edges_ = in_range_incident_edges(topo, state.positions, i,
                                          config_.potential.range);
  event.messages = static_cast<int>(scaled_edges_.size());
  total_messages_ += event.messages;
  return event;
}

void InteractionController::overlay(ScalingState& scaling) const {
  if (!contact_) return;
  for (const int k : scaled_edges_) {
    scaling.alpha_edges[k] = alpha_applied_;
    scaling.c_edges[k] = gamma_applied_;
  }
  scaling.contact_robot = contact_;
}

}  // namespace swarm
