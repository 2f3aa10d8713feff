// Storage-extended multi-period dispatch and its two-layered counterpart.
//
// State of charge follows E_{t+1} = E_t + eta * charge_t - (1/eta) *
// discharge_t with the initial state pinned (default 0) and a free horizon
// end constrained only to stay nonnegative.
#pragma once

#include <string>
#include <vector>

#include "lmegrid/accounting.hpp"
#include "lmegrid/combined.hpp"
#include "lmegrid/dispatch.hpp"

namespace lmegrid {

struct Horizon {
  std::vector<std::vector<double>> demand_mw;        // [t][node]
  std::vector<std::vector<double>> capacity_factor;  // [t][generator]; empty = all 1
  std::vector<double> initial_soc_mwh;               // [storage]; empty = all 0

  int periods() const { return static_cast<int>(demand_mw.size()); }
  // T >= 1, every row sized to the network, initial SOC within [0, e_max].
  void validate(const Network& network) const;
};

// A horizon that replays the network's own demands for T periods.
Horizon uniform_horizon(const Network& network, int periods);

// Horizon CSV: header `period,node_id,demand_mw`; optional companion file
// with header `period,generator_id,capacity_factor`. Periods must be dense
// starting at 0; unlisted nodes default to the network demand and unlisted
// generators to capacity factor 1.
Horizon load_horizon(const std::string& demand_csv, const Network& network,
                     const std::string& capacity_csv = "");
Horizon load_horizon_file(const std::string& demand_path, const Network& network,
                          const std::string& capacity_path = "");

DispatchInputs horizon_inputs(const Network& network, const Horizon& horizon);

struct StorageDispatchResult {
  SolveStatus status = SolveStatus::Infeasible;
  double total_cost = 0.0;
  int iterations = 0;

  std::vector<std::vector<double>> generation_mw, flow_mw, angle_rad;  // [t]
  std::vector<std::vector<double>> lmp, rho_plus, rho_minus, z;        // [t]
  std::vector<std::vector<double>> gamma_plus, gamma_minus;            // [t]
  std::vector<std::vector<double>> charge_mw, discharge_mw;            // [t][s]
  std::vector<std::vector<double>> soc_mwh;                            // [k][s], k=0..T

  // SOC recursion duals (alpha), SOC bound duals (beta-+), and
  // charge/discharge nonnegativity duals (tau+-).
  std::vector<std::vector<double>> alpha;                  // [t][s]
  std::vector<std::vector<double>> beta_plus, beta_minus;  // [k][s], k=0..T-1
  std::vector<std::vector<double>> tau_plus, tau_minus;    // [t][s]
};

StorageDispatchResult solve_storage_dcopf(const Network& network,
                                          const Horizon& horizon,
                                          const SolveOptions& options = {});

struct StorageCombinedResult {
  double total_emissions = 0.0;
  double dispatch_cost = 0.0;
  int iterations = 0;

  std::vector<std::vector<double>> generation_mw, flow_mw, angle_rad;
  std::vector<std::vector<double>> charge_mw, discharge_mw;  // [t][s]
  std::vector<std::vector<double>> soc_mwh;                  // [k][s]

  // Embedded first-layer duals (primal values of the combined LP).
  std::vector<std::vector<double>> pi, rho_plus, rho_minus, z;
  std::vector<std::vector<double>> gamma_plus, gamma_minus;
  std::vector<std::vector<double>> alpha, tau_plus, tau_minus;   // [t][s]
  std::vector<std::vector<double>> beta_plus, beta_minus;        // [k][s]

  // Outer duals.
  std::vector<std::vector<double>> p_pi, p_rho_plus, p_rho_minus, p_z;
  std::vector<std::vector<double>> p_gamma_plus, p_gamma_minus;
  std::vector<std::vector<double>> p_alpha, p_tau_plus, p_tau_minus;
  std::vector<std::vector<double>> p_beta_plus, p_beta_minus;
  double p_o = 0.0;

  std::vector<std::vector<double>> lme_value;  // [t][node], kgCO2/MWh
  std::vector<std::vector<double>> sci_value;  // [t][line]
  std::vector<double> period_emissions;        // [t], kgCO2
};

StorageCombinedResult solve_storage_combined(const Network& network,
                                             const Horizon& horizon,
                                             const SolveOptions& options = {});

// Ledger across the horizon: per-period load/generator/line accounts plus
// storage accounts LME_s * (charge - discharge).
CarbonLedger storage_ledger(const Network& network, const Horizon& horizon,
                            const StorageCombinedResult& result);

struct StorageEquilibriumReport {
  struct Violation {
    std::string storage;
    std::string what;
    double amount = 0.0;
  };
  std::vector<Violation> violations;
  int alternatives_checked = 0;
  int alternatives_infeasible = 0;
  bool clean() const { return violations.empty(); }
};

// (a) the central schedule attains the decentralized storage optimum
// (lexicographic in LMP then LME prices); (b) alternative decentralized-
// optimal schedules, re-dispatched, never reduce cost or, at equal cost,
// emissions.
StorageEquilibriumReport check_storage_equilibrium(const Network& network,
                                                   const Horizon& horizon,
                                                   const StorageCombinedResult& result,
                                                   const SolveOptions& options = {});

}  // namespace lmegrid
