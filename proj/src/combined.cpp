#include "lmegrid/combined.hpp"

#include <cmath>

namespace lmegrid {

TwoLayerLp build_two_layer(const LinearProgram& first_layer,
                           const std::vector<double>& second_objective,
                           double cost_scale_hint) {
  const int n1 = first_layer.num_variables();
  const int m1 = first_layer.num_rows();
  if (static_cast<int>(second_objective.size()) != n1)
    throw InternalError("build_two_layer: objective size mismatch");
  for (int j = 0; j < n1; ++j) {
    const auto& v = first_layer.variable(j);
    if (v.lower != -kInf || v.upper != kInf)
      throw InternalError(
          "build_two_layer: first layer must express bounds as rows (variable '" +
          v.id + "' is bounded)");
  }

  TwoLayerLp out;
  out.first_layer_vars = n1;
  out.first_layer_rows = m1;
  auto& lp = out.lp;

  for (int j = 0; j < n1; ++j)
    lp.add_variable(first_layer.variable(j).id, -kInf, kInf, second_objective[j]);
  for (int r = 0; r < m1; ++r) {
    const auto& row = first_layer.row(r);
    double lo = -kInf, hi = kInf;
    if (row.sense == RowSense::LessEqual) hi = 0.0;       // rho+/gamma+ style
    if (row.sense == RowSense::GreaterEqual) lo = 0.0;    // rho-/gamma- style
    lp.add_variable("d:" + row.id, lo, hi, 0.0);
  }

  for (int r = 0; r < m1; ++r) {
    const auto& row = first_layer.row(r);
    lp.add_row(row.id, row.terms, row.sense, row.rhs);
  }

  // Dual feasibility, one row per first-layer variable: sum_r a_rj y_r = c_j.
  std::vector<std::vector<LpTerm>> by_var(n1);
  for (int r = 0; r < m1; ++r)
    for (const auto& t : first_layer.row(r).terms)
      by_var[t.var].push_back({out.dual_var(r), t.coef});
  for (int j = 0; j < n1; ++j)
    lp.add_row("dual:" + first_layer.variable(j).id, std::move(by_var[j]),
               RowSense::Equal, first_layer.variable(j).objective);

  // c^T x - b^T y <= 0; weak duality supplies >= 0, so the row binds at any
  // feasible point. Normalized by the first-layer cost magnitude.
  const double scale = std::max(1.0, std::abs(cost_scale_hint));
  std::vector<LpTerm> sd;
  for (int j = 0; j < n1; ++j) {
    const double c = first_layer.variable(j).objective;
    if (c != 0.0) sd.push_back({j, c / scale});
  }
  for (int r = 0; r < m1; ++r) {
    const double b = first_layer.row(r).rhs;
    if (b != 0.0) sd.push_back({out.dual_var(r), -b / scale});
  }
  out.strong_duality_row = lp.add_row("strong_duality", std::move(sd),
                                      RowSense::LessEqual, 0.0);
  out.strong_duality_scale = scale;
  return out;
}

CombinedModel build_combined(const Network& network, const SolveOptions& options) {
  CombinedModel model;
  model.first_layer = build_dcopf(network);
  LpSolution first = solve_lp(model.first_layer.lp, options);
  if (first.status != SolveStatus::Optimal)
    throw InfeasibleError(std::string("combined model requires an optimal economic "
                                      "dispatch; first layer is ") +
                          to_string(first.status));
  model.first_layer_objective = first.objective;
  model.two_layer = build_two_layer(model.first_layer.lp,
                                    model.first_layer.emission_objective,
                                    std::abs(first.objective));
  return model;
}

CombinedResult solve_combined(const Network& network, const SolveOptions& options) {
  CombinedModel model = build_combined(network, options);
  LpSolution sol = solve_lp(model.two_layer.lp, options);
  if (sol.status != SolveStatus::Optimal)
    throw InternalError(
        std::string("combined model solve returned ") + to_string(sol.status) +
        "; the economic optimum is always feasible for it");

  const auto& ix = model.first_layer.idx;
  const auto& tl = model.two_layer;
  const double base = kPowerBaseMw;
  const int N = network.num_nodes();
  const int L = network.num_lines();
  const int G = network.num_generators();

  CombinedResult r;
  r.iterations = sol.iterations;
  r.total_emissions = sol.objective * base;

  double cost = 0.0;
  for (int g = 0; g < G; ++g) {
    const double pg = sol.primal[ix.var_pg[0][g]];
    r.generation_mw.push_back(pg * base);
    cost += network.generators()[g].cost_per_mwh * pg;
  }
  r.dispatch_cost = cost * base;
  for (int l = 0; l < L; ++l) r.flow_mw.push_back(sol.primal[ix.var_flow[0][l]] * base);
  for (int n = 0; n < N; ++n) r.angle_rad.push_back(sol.primal[ix.var_theta[0][n]]);

  for (int n = 0; n < N; ++n)
    r.pi.push_back(sol.primal[tl.dual_var(ix.row_balance[0][n])]);
  for (int l = 0; l < L; ++l) {
    r.rho_plus.push_back(sol.primal[tl.dual_var(ix.row_fmax[0][l])]);
    r.rho_minus.push_back(sol.primal[tl.dual_var(ix.row_fmin[0][l])]);
    r.z.push_back(sol.primal[tl.dual_var(ix.row_flowlaw[0][l])]);
  }
  for (int g = 0; g < G; ++g) {
    r.gamma_plus.push_back(sol.primal[tl.dual_var(ix.row_gmax[0][g])]);
    r.gamma_minus.push_back(sol.primal[tl.dual_var(ix.row_gmin[0][g])]);
  }
  r.ref_pin_embedded = sol.primal[tl.dual_var(ix.row_refpin[0])];

  for (int n = 0; n < N; ++n) r.p_pi.push_back(sol.row_dual[ix.row_balance[0][n]]);
  for (int l = 0; l < L; ++l) {
    r.p_rho_plus.push_back(sol.row_dual[ix.row_fmax[0][l]]);
    r.p_rho_minus.push_back(sol.row_dual[ix.row_fmin[0][l]]);
    r.p_z.push_back(sol.row_dual[ix.row_flowlaw[0][l]]);
  }
  for (int g = 0; g < G; ++g) {
    r.p_gamma_plus.push_back(sol.row_dual[ix.row_gmax[0][g]]);
    r.p_gamma_minus.push_back(sol.row_dual[ix.row_gmin[0][g]]);
  }
  r.p_o = sol.row_dual[tl.strong_duality_row] / tl.strong_duality_scale;
  return r;
}

NodalLme lme(const CombinedResult& result, const Network& network) {
  NodalLme out;
  out.value.resize(network.num_nodes());
  for (int n = 0; n < network.num_nodes(); ++n)
    out.value[n] = result.p_pi[n] + result.p_o * result.pi[n];
  return out;
}

LineSci sci(const CombinedResult& result, const Network& network) {
  LineSci out;
  out.value.resize(network.num_lines());
  for (int l = 0; l < network.num_lines(); ++l)
    out.value[l] = result.p_rho_plus[l] - result.p_rho_minus[l] +
                   result.p_o * (result.rho_plus[l] - result.rho_minus[l]);
  return out;
}

std::optional<double> try_emissions_at(const Network& network,
                                       const std::vector<double>& demand_override_mw,
                                       const SolveOptions& options) {
  const Network adjusted = network.with_demands(demand_override_mw);
  DispatchLp model = build_dcopf(adjusted);
  LexicographicResult lex = lexicographic_solve(
      model.lp, model.cost_objective, model.emission_objective, options);
  if (lex.solution.status != SolveStatus::Optimal) return std::nullopt;
  return lex.solution.objective * kPowerBaseMw;
}

double emissions_at(const Network& network,
                    const std::vector<double>& demand_override_mw,
                    const SolveOptions& options) {
  auto e = try_emissions_at(network, demand_override_mw, options);
  if (!e) throw InfeasibleError("emissions_at: demand is not servable");
  return *e;
}

double emissions_at(const Network& network, const SolveOptions& options) {
  std::vector<double> demand;
  for (const auto& n : network.nodes()) demand.push_back(n.demand_mw);
  return emissions_at(network, demand, options);
}

}  // namespace lmegrid
