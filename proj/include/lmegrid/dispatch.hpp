// Economic dispatch LPs and the single-period DC-OPF front end.
//
// All models are built in per-unit power (base 100 MW) with cost and
// emission coefficients left in natural units, so row duals come out
// directly in currency/MWh or kgCO2/MWh and primal power unscales by the
// base. Every dispatch constraint is an explicit row over free variables;
// the combined (second-layer) builder relies on that shape.
#pragma once

#include <string>
#include <vector>

#include "lmegrid/lp.hpp"
#include "lmegrid/network.hpp"

namespace lmegrid {

inline constexpr double kPowerBaseMw = 100.0;

class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resolved per-period inputs in MW. Single-period models use periods == 1.
struct DispatchInputs {
  int periods = 1;
  std::vector<std::vector<double>> demand_mw;   // [t][node]
  std::vector<std::vector<double>> p_min_mw;    // [t][generator]
  std::vector<std::vector<double>> p_max_mw;    // [t][generator]
  std::vector<double> initial_soc_mwh;          // [storage]
};

DispatchInputs single_period_inputs(const Network& network);

// Entity <-> variable/row maps for the first-layer LP. Storage fields stay
// empty when the network has no storage units.
struct DispatchIndex {
  std::vector<std::vector<int>> var_pg, var_flow, var_theta;      // [t][entity]
  std::vector<std::vector<int>> var_charge, var_discharge;        // [t][storage]
  std::vector<std::vector<int>> var_soc;                          // [k][storage], k=0..T

  std::vector<std::vector<int>> row_flowlaw, row_balance;         // [t][entity]
  std::vector<std::vector<int>> row_fmax, row_fmin;               // [t][line]
  std::vector<std::vector<int>> row_gmax, row_gmin;               // [t][generator]
  std::vector<int> row_refpin;                                    // [t]
  std::vector<std::vector<int>> row_charge_cap, row_discharge_cap;  // [t][storage], -1 if uncapped
  std::vector<int> row_soc_init;                                  // [storage]
  std::vector<std::vector<int>> row_soc_recursion;                // [t][storage]
  std::vector<std::vector<int>> row_charge_nonneg, row_discharge_nonneg;  // [t][storage]
  std::vector<std::vector<int>> row_soc_min, row_soc_max;         // [k][storage], k=0..T-1
  std::vector<int> row_soc_terminal;                              // [storage]
};

struct DispatchLp {
  LinearProgram lp;
  DispatchIndex idx;
  std::vector<double> cost_objective;      // c_g over lp variables
  std::vector<double> emission_objective;  // sigma_g over lp variables
  int periods = 1;
};

DispatchLp build_dispatch_lp(const Network& network, const DispatchInputs& inputs);

// Single-period DC-OPF model; |G| + |L| + |N| variables, one balance row per
// node, one flow-law row per line, box rows per line and generator, and the
// reference angle pinned to zero by an equality row.
DispatchLp build_dcopf(const Network& network);

struct DispatchResult {
  SolveStatus status = SolveStatus::Infeasible;
  double total_cost = 0.0;
  std::vector<double> generation_mw;  // per generator
  std::vector<double> flow_mw;        // per line, positive from->to
  std::vector<double> angle_rad;      // per node
  std::vector<double> lmp;            // pi, per node
  std::vector<double> rho_plus;       // per line, <= 0
  std::vector<double> rho_minus;      // per line, >= 0
  std::vector<double> gamma_plus;     // per generator, <= 0
  std::vector<double> gamma_minus;    // per generator, >= 0
  std::vector<double> flow_law_dual;  // z, per line
  // Dual of the reference-angle pin. Recorded for completeness but excluded
  // from every LME/SCI formula.
  double ref_pin_dual = 0.0;
  int iterations = 0;
};

DispatchResult solve_dcopf(const Network& network, const SolveOptions& options = {});

// Residual diagnostics for a dispatch solution: nodal balance, flow law,
// box constraints, stationarity gamma+ + gamma- + pi = c, and the strong
// duality identity.
struct DispatchCheck {
  double balance = 0.0;
  double flow_law = 0.0;
  double box = 0.0;
  double stationarity = 0.0;
  double duality_gap = 0.0;
  double complementary_slackness = 0.0;
  double max_residual() const;
};
DispatchCheck check_dispatch(const Network& network, const DispatchResult& r);

}  // namespace lmegrid
