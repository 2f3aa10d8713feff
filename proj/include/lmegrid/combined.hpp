// Two-layered model: minimize emissions over the economically optimal
// dispatch set, encoded as a single LP by adjoining the first layer's dual
// feasibility system and one strong-duality row to its primal constraints.
// Locational marginal emissions and shadow carbon intensities are read off
// the outer duals of that LP.
#pragma once

#include <optional>
#include <vector>

#include "lmegrid/dispatch.hpp"

namespace lmegrid {

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mechanical second-layer construction over a first-layer LP whose
// variables are all free and whose constraints are all explicit rows.
// Layout: variables [0, n1) primal, [n1, n1+m1) one dual per first-layer
// row (sign-bounded by row sense); rows [0, m1) the first-layer rows,
// [m1, m1+n1) one dual-feasibility row per first-layer variable, then the
// single strong-duality row.
struct TwoLayerLp {
  LinearProgram lp;
  int first_layer_vars = 0;
  int first_layer_rows = 0;
  int strong_duality_row = 0;
  // The strong-duality row mixes cost and power scales; it is divided by
  // this factor. True p_o = solver dual / strong_duality_scale.
  double strong_duality_scale = 1.0;

  int dual_var(int first_layer_row) const {
    return first_layer_vars + first_layer_row;
  }
  int dual_feasibility_row(int first_layer_var) const {
    return first_layer_rows + first_layer_var;
  }
};

TwoLayerLp build_two_layer(const LinearProgram& first_layer,
                           const std::vector<double>& second_objective,
                           double cost_scale_hint);

struct CombinedModel {
  DispatchLp first_layer;
  TwoLayerLp two_layer;
  double first_layer_objective = 0.0;  // per-unit cost optimum of the first layer
};

// Requires solve_dcopf(network) optimal; throws InfeasibleError otherwise.
CombinedModel build_combined(const Network& network, const SolveOptions& options = {});

struct CombinedResult {
  double total_emissions = 0.0;  // E = sigma^T P^G, kgCO2
  double dispatch_cost = 0.0;    // equals the first-layer optimum

  // Emission-optimal dispatch.
  std::vector<double> generation_mw, flow_mw, angle_rad;

  // First-layer duals embedded as primal decision values.
  std::vector<double> pi;                      // per node
  std::vector<double> rho_plus, rho_minus, z;  // per line
  std::vector<double> gamma_plus, gamma_minus; // per generator
  double ref_pin_embedded = 0.0;

  // Outer duals.
  std::vector<double> p_pi;                        // per node
  std::vector<double> p_rho_plus, p_rho_minus, p_z;  // per line
  std::vector<double> p_gamma_plus, p_gamma_minus;   // per generator
  double p_o = 0.0;  // dual of the strong-duality row

  int iterations = 0;
};

CombinedResult solve_combined(const Network& network, const SolveOptions& options = {});

struct NodalLme {
  std::vector<double> value;  // kgCO2/MWh per node
};
struct LineSci {
  std::vector<double> value;  // kgCO2/MWh per line
};

// LME_i = p_pi_i + p_o * pi_i
NodalLme lme(const CombinedResult& result, const Network& network);
// SCI_l = p_rho+_l - p_rho-_l + p_o * (rho+_l - rho-_l)
LineSci sci(const CombinedResult& result, const Network& network);

// E(P^D) through the independent lexicographic route: minimize cost, then
// minimize emissions subject to cost optimality. Never touches the
// dualized formulation.
double emissions_at(const Network& network,
                    const std::vector<double>& demand_override_mw,
                    const SolveOptions& options = {});
double emissions_at(const Network& network, const SolveOptions& options = {});
std::optional<double> try_emissions_at(const Network& network,
                                       const std::vector<double>& demand_override_mw,
                                       const SolveOptions& options = {});

}  // namespace lmegrid
