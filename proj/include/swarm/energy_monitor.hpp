#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "swarm/potentials.hpp"
#include "swarm/state.hpp"
#include "swarm/topology.hpp"

namespace swarm {

// Running energy accounts of one simulation: kinetic and edge potential
// energies, the plain and scaled totals, the supplied-power integral, and
// the margins of the two passivity certificates.
struct EnergyLedger {
  Eigen::VectorXd kinetic;          // K_i = p_i^T p_i / (2 m_i)
  Eigen::VectorXd potential_edges;  // V_k per edge, full complete graph
  double total_energy = 0.0;        // H  = sum K + sum V_k
  double scaled_energy = 0.0;       // H_s = sum K + sum alpha_k V_k
  double supplied_integral = 0.0;   // trapezoidal int (F^c + F^e)^T v
  double initial_kinetic_sum = 0.0;
  double initial_total_energy = 0.0;

  // Instantaneous margins: supplied + H(0) and supplied + sum K(0).
  double margin_nominal = 0.0;
  double margin_scaled = 0.0;
  double min_margin_nominal = std::numeric_limits<double>::infinity();
  double min_margin_scaled = std::numeric_limits<double>::infinity();

  long updates = 0;
  double last_power = 0.0;

  // Bookkeeping for the scaled certificate's precondition: extent of the
  // recorded non-unit gains, and whether unit gains coexisted with them.
  double scaled_alpha_min = std::numeric_limits<double>::infinity();
  double scaled_alpha_max = -std::numeric_limits<double>::infinity();
  bool saw_unit_alpha = false;
  bool saw_scaled_alpha = false;
};

// Recomputes every stored energy from the state, accumulates the supplied
// integral with the inputs active over the step, and refreshes both margins.
// The first call freezes the initial energies and accumulates nothing.
void update_ledger(EnergyLedger& ledger, const RobotState& state,
                   const SwarmTopology& topo, const PotentialParams& params,
                   const ScalingState& scaling,
                   const std::vector<Eigen::Vector3d>& drive_forces,
                   const std::vector<Eigen::Vector3d>& env_forces, double dt);

struct PassivityVerdict {
  bool passed = false;
  double margin = 0.0;
  double tolerance = 0.0;
  // The scaled certificate needs every recorded gain inside
  // [alpha_min, alpha_max] (with 1 counting as inside on unscaled edges).
  bool precondition_ok = true;
};

// Supplied integral >= -H(0) - tol at every recorded time.
PassivityVerdict check_passivity_nominal(const EnergyLedger& ledger);

// Supplied integral >= -sum K_i(0) - tol at every recorded time, valid only
// while all recorded gains stayed within the bounds.
PassivityVerdict check_passivity_scaled(const EnergyLedger& ledger,
                                        const AlphaBounds& bounds);

// Per-step defect of the scaled energy balance
//   dH_s/dt = (F^c + F^e)^T v - v^T B_underbar v
// on steps where no edge gain changed. Entries where the gains changed are
// NaN. Series are indexed per step; the result has size() - 1 entries.
std::vector<double> energy_balance_residual(
    const std::vector<double>& scaled_energy,
    const std::vector<double>& power_in,
    const std::vector<double>& dissipation,
    const std::vector<char>& scaling_changed, double dt);

}  // namespace swarm
