#include "lmegrid/dispatch.hpp"

#include <cmath>

namespace lmegrid {

namespace {
std::string tag(const std::string& kind, int t, const std::string& id) {
  return kind + "[" + std::to_string(t) + "," + id + "]";
}
}  // namespace

DispatchInputs single_period_inputs(const Network& network) {
  DispatchInputs in;
  in.periods = 1;
  in.demand_mw.resize(1);
  in.p_min_mw.resize(1);
  in.p_max_mw.resize(1);
  for (const auto& n : network.nodes()) in.demand_mw[0].push_back(n.demand_mw);
  for (const auto& g : network.generators()) {
    in.p_min_mw[0].push_back(g.p_min_mw);
    in.p_max_mw[0].push_back(g.p_max_mw);
  }
  in.initial_soc_mwh.assign(network.num_storages(), 0.0);
  return in;
}

DispatchLp build_dispatch_lp(const Network& network, const DispatchInputs& inputs) {
  const int T = inputs.periods;
  const int N = network.num_nodes();
  const int L = network.num_lines();
  const int G = network.num_generators();
  const int S = network.num_storages();
  if (T < 1) throw InternalError("build_dispatch_lp: periods must be >= 1");
  const double base = kPowerBaseMw;

  DispatchLp out;
  out.periods = T;
  auto& lp = out.lp;
  auto& ix = out.idx;

  ix.var_pg.assign(T, std::vector<int>(G));
  ix.var_flow.assign(T, std::vector<int>(L));
  ix.var_theta.assign(T, std::vector<int>(N));
  ix.var_charge.assign(T, std::vector<int>(S));
  ix.var_discharge.assign(T, std::vector<int>(S));
  ix.var_soc.assign(T + 1, std::vector<int>(S));

  for (int t = 0; t < T; ++t) {
    for (int g = 0; g < G; ++g)
      ix.var_pg[t][g] = lp.add_variable(tag("pg", t, network.generators()[g].id));
    for (int l = 0; l < L; ++l)
      ix.var_flow[t][l] = lp.add_variable(tag("f", t, network.lines()[l].id));
    for (int n = 0; n < N; ++n)
      ix.var_theta[t][n] = lp.add_variable(tag("theta", t, network.nodes()[n].id));
    for (int s = 0; s < S; ++s)
      ix.var_charge[t][s] = lp.add_variable(tag("chg", t, network.storages()[s].id));
    for (int s = 0; s < S; ++s)
      ix.var_discharge[t][s] = lp.add_variable(tag("dis", t, network.storages()[s].id));
  }
  for (int k = 0; k <= T; ++k)
    for (int s = 0; s < S; ++s)
      ix.var_soc[k][s] = lp.add_variable(tag("soc", k, network.storages()[s].id));

  ix.row_flowlaw.assign(T, std::vector<int>(L));
  ix.row_balance.assign(T, std::vector<int>(N));
  ix.row_fmax.assign(T, std::vector<int>(L));
  ix.row_fmin.assign(T, std::vector<int>(L));
  ix.row_gmax.assign(T, std::vector<int>(G));
  ix.row_gmin.assign(T, std::vector<int>(G));
  ix.row_refpin.assign(T, -1);
  ix.row_charge_cap.assign(T, std::vector<int>(S, -1));
  ix.row_discharge_cap.assign(T, std::vector<int>(S, -1));
  ix.row_soc_init.assign(S, -1);
  ix.row_soc_recursion.assign(T, std::vector<int>(S));
  ix.row_charge_nonneg.assign(T, std::vector<int>(S));
  ix.row_discharge_nonneg.assign(T, std::vector<int>(S));
  ix.row_soc_min.assign(T, std::vector<int>(S));
  ix.row_soc_max.assign(T, std::vector<int>(S));
  ix.row_soc_terminal.assign(S, -1);

  for (int t = 0; t < T; ++t) {
    // f = B (theta_from - theta_to)
    for (int l = 0; l < L; ++l) {
      const auto& ln = network.lines()[l];
      ix.row_flowlaw[t][l] = lp.add_row(
          tag("flowlaw", t, ln.id),
          {{ix.var_theta[t][network.line_from(l)], ln.susceptance},
           {ix.var_theta[t][network.line_to(l)], -ln.susceptance},
           {ix.var_flow[t][l], -1.0}},
          RowSense::Equal, 0.0);
    }
    // Nodal balance: generation - outflow + inflow - storage net charge = demand.
    for (int n = 0; n < N; ++n) {
      std::vector<LpTerm> terms;
      for (int g = 0; g < G; ++g)
        if (network.generator_node(g) == n) terms.push_back({ix.var_pg[t][g], 1.0});
      for (int l = 0; l < L; ++l) {
        if (network.line_from(l) == n) terms.push_back({ix.var_flow[t][l], -1.0});
        if (network.line_to(l) == n) terms.push_back({ix.var_flow[t][l], 1.0});
      }
      for (int s = 0; s < S; ++s)
        if (network.storage_node(s) == n) {
          terms.push_back({ix.var_charge[t][s], -1.0});
          terms.push_back({ix.var_discharge[t][s], 1.0});
        }
      ix.row_balance[t][n] =
          lp.add_row(tag("balance", t, network.nodes()[n].id), std::move(terms),
                     RowSense::Equal, inputs.demand_mw[t][n] / base);
    }
    for (int l = 0; l < L; ++l) {
      const double cap = network.lines()[l].f_max_mw / base;
      ix.row_fmax[t][l] = lp.add_row(tag("fmax", t, network.lines()[l].id),
                                     {{ix.var_flow[t][l], 1.0}}, RowSense::LessEqual, cap);
      ix.row_fmin[t][l] = lp.add_row(tag("fmin", t, network.lines()[l].id),
                                     {{ix.var_flow[t][l], 1.0}}, RowSense::GreaterEqual,
                                     -cap);
    }
    for (int g = 0; g < G; ++g) {
      ix.row_gmax[t][g] = lp.add_row(tag("gmax", t, network.generators()[g].id),
                                     {{ix.var_pg[t][g], 1.0}}, RowSense::LessEqual,
                                     inputs.p_max_mw[t][g] / base);
      ix.row_gmin[t][g] = lp.add_row(tag("gmin", t, network.generators()[g].id),
                                     {{ix.var_pg[t][g], 1.0}}, RowSense::GreaterEqual,
                                     inputs.p_min_mw[t][g] / base);
    }
    ix.row_refpin[t] =
        lp.add_row(tag("refpin", t, network.reference_node()),
                   {{ix.var_theta[t][network.reference_index()], 1.0}},
                   RowSense::Equal, 0.0);
    for (int s = 0; s < S; ++s) {
      const auto& st = network.storages()[s];
      if (!st.power_cap_mw) continue;
      const double cap = *st.power_cap_mw / base;
      ix.row_charge_cap[t][s] = lp.add_row(tag("chgcap", t, st.id),
                                           {{ix.var_charge[t][s], 1.0}},
                                           RowSense::LessEqual, cap);
      ix.row_discharge_cap[t][s] = lp.add_row(tag("discap", t, st.id),
                                              {{ix.var_discharge[t][s], 1.0}},
                                              RowSense::LessEqual, cap);
    }
  }

  for (int s = 0; s < S; ++s) {
    const double e0 = (s < static_cast<int>(inputs.initial_soc_mwh.size())
                           ? inputs.initial_soc_mwh[s]
                           : 0.0) /
                      base;
    ix.row_soc_init[s] = lp.add_row(tag("socinit", 0, network.storages()[s].id),
                                    {{ix.var_soc[0][s], 1.0}}, RowSense::Equal, e0);
  }
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      const double eta = network.storages()[s].efficiency;
      ix.row_soc_recursion[t][s] = lp.add_row(
          tag("soc", t, network.storages()[s].id),
          {{ix.var_soc[t][s], 1.0},
           {ix.var_charge[t][s], eta},
           {ix.var_discharge[t][s], -1.0 / eta},
           {ix.var_soc[t + 1][s], -1.0}},
          RowSense::Equal, 0.0);
    }
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      ix.row_charge_nonneg[t][s] =
          lp.add_row(tag("chgpos", t, network.storages()[s].id),
                     {{ix.var_charge[t][s], 1.0}}, RowSense::GreaterEqual, 0.0);
      ix.row_discharge_nonneg[t][s] =
          lp.add_row(tag("dispos", t, network.storages()[s].id),
                     {{ix.var_discharge[t][s], 1.0}}, RowSense::GreaterEqual, 0.0);
    }
  for (int k = 0; k < T; ++k)
    for (int s = 0; s < S; ++s) {
      ix.row_soc_min[k][s] = lp.add_row(tag("socmin", k, network.storages()[s].id),
                                        {{ix.var_soc[k][s], 1.0}},
                                        RowSense::GreaterEqual, 0.0);
      ix.row_soc_max[k][s] = lp.add_row(tag("socmax", k, network.storages()[s].id),
                                        {{ix.var_soc[k][s], 1.0}}, RowSense::LessEqual,
                                        network.storages()[s].e_max_mwh / base);
    }
  // Free horizon end: the terminal state only has to stay physical.
  for (int s = 0; s < S; ++s)
    ix.row_soc_terminal[s] = lp.add_row(tag("socend", T, network.storages()[s].id),
                                        {{ix.var_soc[T][s], 1.0}},
                                        RowSense::GreaterEqual, 0.0);

  out.cost_objective.assign(lp.num_variables(), 0.0);
  out.emission_objective.assign(lp.num_variables(), 0.0);
  for (int t = 0; t < T; ++t)
    for (int g = 0; g < G; ++g) {
      out.cost_objective[ix.var_pg[t][g]] = network.generators()[g].cost_per_mwh;
      out.emission_objective[ix.var_pg[t][g]] = network.generators()[g].emission_rate;
    }
  for (int j = 0; j < lp.num_variables(); ++j)
    lp.set_objective(j, out.cost_objective[j]);
  return out;
}

DispatchLp build_dcopf(const Network& network) {
  return build_dispatch_lp(network, single_period_inputs(network));
}

DispatchResult solve_dcopf(const Network& network, const SolveOptions& options) {
  DispatchLp model = build_dcopf(network);
  LpSolution sol = solve_lp(model.lp, options);
  DispatchResult r;
  r.status = sol.status;
  r.iterations = sol.iterations;
  if (sol.status != SolveStatus::Optimal) return r;

  const auto& ix = model.idx;
  const double base = kPowerBaseMw;
  r.total_cost = sol.objective * base;
  for (int g = 0; g < network.num_generators(); ++g)
    r.generation_mw.push_back(sol.primal[ix.var_pg[0][g]] * base);
  for (int l = 0; l < network.num_lines(); ++l)
    r.flow_mw.push_back(sol.primal[ix.var_flow[0][l]] * base);
  for (int n = 0; n < network.num_nodes(); ++n)
    r.angle_rad.push_back(sol.primal[ix.var_theta[0][n]]);
  for (int n = 0; n < network.num_nodes(); ++n)
    r.lmp.push_back(sol.row_dual[ix.row_balance[0][n]]);
  for (int l = 0; l < network.num_lines(); ++l) {
    r.rho_plus.push_back(sol.row_dual[ix.row_fmax[0][l]]);
    r.rho_minus.push_back(sol.row_dual[ix.row_fmin[0][l]]);
    r.flow_law_dual.push_back(sol.row_dual[ix.row_flowlaw[0][l]]);
  }
  for (int g = 0; g < network.num_generators(); ++g) {
    r.gamma_plus.push_back(sol.row_dual[ix.row_gmax[0][g]]);
    r.gamma_minus.push_back(sol.row_dual[ix.row_gmin[0][g]]);
  }
  r.ref_pin_dual = sol.row_dual[ix.row_refpin[0]];
  return r;
}

double DispatchCheck::max_residual() const {
  double m = balance;
  m = std::max(m, flow_law);
  m = std::max(m, box);
  m = std::max(m, stationarity);
  m = std::max(m, duality_gap);
  m = std::max(m, complementary_slackness);
  return m;
}

DispatchCheck check_dispatch(const Network& network, const DispatchResult& r) {
  DispatchCheck c;
  if (r.status != SolveStatus::Optimal) return c;
  const int N = network.num_nodes();
  const int L = network.num_lines();
  const int G = network.num_generators();

  for (int n = 0; n < N; ++n) {
    double acc = -network.nodes()[n].demand_mw;
    for (int g = 0; g < G; ++g)
      if (network.generator_node(g) == n) acc += r.generation_mw[g];
    for (int l = 0; l < L; ++l) {
      if (network.line_from(l) == n) acc -= r.flow_mw[l];
      if (network.line_to(l) == n) acc += r.flow_mw[l];
    }
    c.balance = std::max(c.balance, std::abs(acc));
  }
  for (int l = 0; l < L; ++l) {
    const auto& ln = network.lines()[l];
    const double implied = ln.susceptance *
                           (r.angle_rad[network.line_from(l)] -
                            r.angle_rad[network.line_to(l)]) *
                           kPowerBaseMw;
    c.flow_law = std::max(c.flow_law, std::abs(implied - r.flow_mw[l]));
    c.box = std::max(c.box, std::abs(r.flow_mw[l]) - ln.f_max_mw);
    const double slack_up = ln.f_max_mw - r.flow_mw[l];
    const double slack_dn = r.flow_mw[l] + ln.f_max_mw;
    c.complementary_slackness = std::max(
        c.complementary_slackness, std::abs(r.rho_plus[l] * slack_up / kPowerBaseMw));
    c.complementary_slackness = std::max(
        c.complementary_slackness, std::abs(r.rho_minus[l] * slack_dn / kPowerBaseMw));
  }
  for (int g = 0; g < G; ++g) {
    const auto& gen = network.generators()[g];
    c.box = std::max(c.box, r.generation_mw[g] - gen.p_max_mw);
    c.box = std::max(c.box, gen.p_min_mw - r.generation_mw[g]);
    c.stationarity =
        std::max(c.stationarity,
                 std::abs(r.gamma_plus[g] + r.gamma_minus[g] +
                          r.lmp[network.generator_node(g)] - gen.cost_per_mwh));
    c.complementary_slackness =
        std::max(c.complementary_slackness,
                 std::abs(r.gamma_plus[g] * (gen.p_max_mw - r.generation_mw[g]) /
                          kPowerBaseMw));
    c.complementary_slackness =
        std::max(c.complementary_slackness,
                 std::abs(r.gamma_minus[g] * (r.generation_mw[g] - gen.p_min_mw) /
                          kPowerBaseMw));
  }

  double dual_obj = 0.0;
  for (int n = 0; n < N; ++n) dual_obj += r.lmp[n] * network.nodes()[n].demand_mw;
  for (int l = 0; l < L; ++l)
    dual_obj += (r.rho_plus[l] - r.rho_minus[l]) * network.lines()[l].f_max_mw;
  for (int g = 0; g < G; ++g)
    dual_obj += r.gamma_plus[g] * network.generators()[g].p_max_mw +
                r.gamma_minus[g] * network.generators()[g].p_min_mw;
  c.duality_gap = std::abs(r.total_cost - dual_obj) / (1.0 + std::abs(r.total_cost));
  return c;
}

}  // namespace lmegrid
