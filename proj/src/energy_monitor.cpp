#include "swarm/energy_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace swarm {

void update_ledger(EnergyLedger& ledger, const RobotState& state,
                   const SwarmTopology& topo, const PotentialParams& params,
                   const ScalingState& scaling,
                   const std::vector<Eigen::Vector3d>& drive_forces,
                   const std::vector<Eigen::Vector3d>& env_forces, double dt) {
  const int n = state.size();
  ledger.kinetic.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d& p = state.momenta[static_cast<size_t>(i)];
    ledger.kinetic[i] = p.squaredNorm() / (2.0 * state.masses[i]);
  }

  ledger.potential_edges.resize(topo.n_edges());
  double scaled_potential = 0.0;
  for (int k = 0; k < topo.n_edges(); ++k) {
    const auto [i, j] = topo.edge(k);
    const double d = (state.positions[static_cast<size_t>(i)] -
                      state.positions[static_cast<size_t>(j)])
                         .norm();
    ledger.potential_edges[k] = pair_potential(d, params);
    const double alpha = scaling.alpha_edges[k];
    scaled_potential += alpha * ledger.potential_edges[k];
    if (alpha == 1.0) {
      ledger.saw_unit_alpha = true;
    } else {
      ledger.saw_scaled_alpha = true;
      ledger.scaled_alpha_min = std::min(ledger.scaled_alpha_min, alpha);
      ledger.scaled_alpha_max = std::max(ledger.scaled_alpha_max, alpha);
    }
  }

  const double kinetic_sum = ledger.kinetic.sum();
  ledger.total_energy = kinetic_sum + ledger.potential_edges.sum();
  ledger.scaled_energy = kinetic_sum + scaled_potential;

  double power = 0.0;
  for (int i = 0; i < n; ++i) {
    power += (drive_forces[static_cast<size_t>(i)] +
              env_forces[static_cast<size_t>(i)])
                 .dot(state.velocity(i));
  }

  if (ledger.updates == 0) {
    ledger.initial_kinetic_sum = kinetic_sum;
    ledger.initial_total_energy = ledger.total_energy;
    ledger.supplied_integral = 0.0;
  } else {
    ledger.supplied_integral += dt * (ledger.last_power + power) / 2.0;
  }
  ledger.last_power = power;

  ledger.margin_nominal =
      ledger.supplied_integral + ledger.initial_total_energy;
  ledger.margin_scaled = ledger.supplied_integral + ledger.initial_kinetic_sum;
  ledger.min_margin_nominal =
      std::min(ledger.min_margin_nominal, ledger.margin_nominal);
  ledger.min_margin_scaled =
      std::min(ledger.min_margin_scaled, ledger.margin_scaled);
  ++ledger.updates;
}

PassivityVerdict check_passivity_nominal(const EnergyLedger& ledger) {
  if (ledger.updates < 1) {
    throw std::invalid_argument(
        "check_passivity_nominal: ledger has no recorded steps");
  }
  PassivityVerdict verdict;
  verdict.tolerance = 1e-6 * (1.0 + std::abs(ledger.initial_total_energy));
  verdict.margin = ledger.min_margin_nominal;
  verdict.passed = verdict.margin >= -verdict.tolerance;
  return verdict;
}

PassivityVerdict check_passivity_scaled(const EnergyLedger& ledger,
                                        const AlphaBounds& bounds) {
  if (ledger.updates < 1) {
    throw std::invalid_argument(
        "check_passivity_scaled: ledger has no recorded steps");
  }
  bounds.validate();
  PassivityVerdict verdict;
  verdict.tolerance = 1e-6 * (1.0 + std::abs(ledger.initial_kinetic_sum));
  verdict.margin = ledger.min_margin_scaled;
  verdict.precondition_ok = true;
  if (ledger.saw_scaled_alpha) {
    if (ledger.scaled_alpha_min < bounds.lower ||
        ledger.scaled_alpha_max > bounds.upper) {
      verdict.precondition_ok = false;
    }
    // Unit gains on unscaled edges must themselves sit inside the single
    // certified interval when they coexist with scaled ones.
    if (ledger.saw_unit_alpha && !bounds.contains(1.0)) {
      verdict.precondition_ok = false;
    }
  }
  verdict.passed =
      verdict.precondition_ok && verdict.margin >= -verdict.tolerance;
  return verdict;
}

std::vector<double> energy_balance_residual(
    const std::vector<double>& scaled_energy,
    const std::vector<double>& power_in,
    const std::vector<double>& dissipation,
    const std::vector<char>& scaling_changed, double dt) {
  const size_t n = scaled_energy.size();
  if (power_in.size() != n || dissipation.size() != n ||
      scaling_changed.size() != n) {
    throw std::invalid_argument("energy_balance_residual: size mismatch");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("energy_balance_residual: dt must be > 0");
  }
  if (n < 2) return {};
  std::vector<double> residual(n - 1);
  for (size_t k = 0; k + 1 < n; ++k) {
    if (scaling_changed[k + 1]) {
      residual[k] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double rate = (scaled_energy[k + 1] - scaled_energy[k]) / dt;
    residual[k] = rate - (power_in[k] - dissipation[k]);
  }
  return residual;
}

}  // namespace swarm
