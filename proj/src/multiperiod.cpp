#include "lmegrid/multiperiod.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace lmegrid {

void Horizon::validate(const Network& network) const {
  using Kind = ValidationError::Kind;
  if (periods() < 1)
    throw ValidationError(Kind::Semantic, "", "horizon must have at least one period");
  for (int t = 0; t < periods(); ++t) {
    if (static_cast<int>(demand_mw[t].size()) != network.num_nodes())
      throw ValidationError(Kind::Semantic, "",
                            "horizon demand row " + std::to_string(t) +
                                " does not cover every node");
    for (double d : demand_mw[t])
      if (!std::isfinite(d))
        throw ValidationError(Kind::Semantic, "", "horizon demand is not finite");
  }
  if (!capacity_factor.empty()) {
    if (static_cast<int>(capacity_factor.size()) != periods())
      throw ValidationError(Kind::Semantic, "", "capacity_factor period count mismatch");
    for (const auto& row : capacity_factor) {
      if (static_cast<int>(row.size()) != network.num_generators())
        throw ValidationError(Kind::Semantic, "",
                              "capacity_factor row does not cover every generator");
      for (double v : row)
        if (!(v >= 0.0 && v <= 1.0))
          throw ValidationError(Kind::Semantic, "",
                                "capacity_factor values must lie in [0,1]");
    }
  }
  if (!initial_soc_mwh.empty()) {
    if (static_cast<int>(initial_soc_mwh.size()) != network.num_storages())
      throw ValidationError(Kind::Semantic, "", "initial SOC count mismatch");
    for (int s = 0; s < network.num_storages(); ++s)
      if (!(initial_soc_mwh[s] >= 0.0 &&
            initial_soc_mwh[s] <= network.storages()[s].e_max_mwh))
        throw ValidationError(Kind::Semantic, network.storages()[s].id,
                              "initial SOC for '" + network.storages()[s].id +
                                  "' outside [0, e_max]");
  }
}

Horizon uniform_horizon(const Network& network, int periods) {
  Horizon h;
  std::vector<double> demand;
  for (const auto& n : network.nodes()) demand.push_back(n.demand_mw);
  h.demand_mw.assign(periods, demand);
  return h;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvRow {
  int period;
  std::string entity;
  double value;
};

std::vector<CsvRow> parse_three_column(const std::string& text,
                                       const std::vector<std::string>& header) {
  using Kind = ValidationError::Kind;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(Kind::Schema, "", "horizon CSV is empty");
  auto h = split_line(line);
  if (h != header)
    throw ValidationError(Kind::Schema, "",
                          "horizon CSV header must be " + header[0] + "," +
                              header[1] + "," + header[2]);
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_line(line);
    if (f.size() != 3)
      throw ValidationError(Kind::Schema, "",
                            "horizon CSV line " + std::to_string(lineno) +
                                ": expected 3 columns");
    try {
      rows.push_back({std::stoi(f[0]), f[1], std::stod(f[2])});
    } catch (const std::exception&) {
      throw ValidationError(Kind::Schema, "",
                            "horizon CSV line " + std::to_string(lineno) +
                                ": non-numeric period or value");
    }
  }
  if (rows.empty())
    throw ValidationError(Kind::Schema, "", "horizon CSV has no data rows");
  return rows;
}

}  // namespace

Horizon load_horizon(const std::string& demand_csv, const Network& network,
                     const std::string& capacity_csv) {
  using Kind = ValidationError::Kind;
  auto rows = parse_three_column(demand_csv, {"period", "node_id", "demand_mw"});
  int max_period = 0;
  for (const auto& r : rows) {
    if (r.period < 0)
      throw ValidationError(Kind::Schema, "", "horizon CSV: negative period");
    max_period = std::max(max_period, r.period);
  }
  Horizon h;
  std::vector<double> defaults;
  for (const auto& n : network.nodes()) defaults.push_back(n.demand_mw);
  h.demand_mw.assign(max_period + 1, defaults);
  for (const auto& r : rows) {
    const int i = network.node_index(r.entity);
    if (i < 0)
      throw ValidationError(Kind::Semantic, r.entity,
                            "horizon references unknown node '" + r.entity + "'");
    h.demand_mw[r.period][i] = r.value;
  }
  if (!capacity_csv.empty()) {
    auto caps =
        parse_three_column(capacity_csv, {"period", "generator_id", "capacity_factor"});
    h.capacity_factor.assign(max_period + 1,
                             std::vector<double>(network.num_generators(), 1.0));
    std::unordered_map<std::string, int> gen_lookup;
    for (int g = 0; g < network.num_generators(); ++g)
      gen_lookup[network.generators()[g].id] = g;
    for (const auto& r : caps) {
      if (r.period < 0 || r.period > max_period)
        throw ValidationError(Kind::Semantic, r.entity,
                              "capacity factor period outside the demand horizon");
      auto it = gen_lookup.find(r.entity);
      if (it == gen_lookup.end())
        throw ValidationError(Kind::Semantic, r.entity,
                              "horizon references unknown generator '" + r.entity + "'");
      h.capacity_factor[r.period][it->second] = r.value;
    }
  }
  h.validate(network);
  return h;
}

Horizon load_horizon_file(const std::string& demand_path, const Network& network,
                          const std::string& capacity_path) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    if (!in)
      throw ValidationError(ValidationError::Kind::Schema, path,
                            "cannot open horizon file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  return load_horizon(slurp(demand_path), network,
                      capacity_path.empty() ? "" : slurp(capacity_path));
}

DispatchInputs horizon_inputs(const Network& network, const Horizon& horizon) {
  horizon.validate(network);
  const int T = horizon.periods();
  DispatchInputs in;
  in.periods = T;
  in.demand_mw = horizon.demand_mw;
  in.p_min_mw.assign(T, {});
  in.p_max_mw.assign(T, {});
  for (int t = 0; t < T; ++t) {
    for (int g = 0; g < network.num_generators(); ++g) {
      const auto& gen = network.generators()[g];
      const double cf = horizon.capacity_factor.empty() ? 1.0
                                                        : horizon.capacity_factor[t][g];
      const double pmax = cf * gen.p_max_mw;
      in.p_max_mw[t].push_back(pmax);
      in.p_min_mw[t].push_back(std::min(gen.p_min_mw, pmax));
    }
  }
  in.initial_soc_mwh = horizon.initial_soc_mwh;
  in.initial_soc_mwh.resize(network.num_storages(), 0.0);
  return in;
}

namespace {

// Gathers [t][entity] matrices of primal values or row duals out of a
// solved first-layer LP.
struct Extractor {
  const DispatchIndex& ix;
  const std::vector<double>& primal;
  const std::vector<double>& dual;
  double scale;

  std::vector<std::vector<double>> primal_grid(
      const std::vector<std::vector<int>>& vars, double k) const {
    std::vector<std::vector<double>> out(vars.size());
    for (size_t t = 0; t < vars.size(); ++t)
      for (int j : vars[t]) out[t].push_back(primal[j] * k);
    return out;
  }
  std::vector<std::vector<double>> dual_grid(
      const std::vector<std::vector<int>>& rows) const {
    std::vector<std::vector<double>> out(rows.size());
    for (size_t t = 0; t < rows.size(); ++t)
      for (int r : rows[t]) out[t].push_back(dual[r]);
    return out;
  }
};

}  // namespace

StorageDispatchResult solve_storage_dcopf(const Network& network,
                                          const Horizon& horizon,
                                          const SolveOptions& options) {
  DispatchLp model = build_dispatch_lp(network, horizon_inputs(network, horizon));
  LpSolution sol = solve_lp(model.lp, options);
  StorageDispatchResult r;
  r.status = sol.status;
  r.iterations = sol.iterations;
  if (sol.status != SolveStatus::Optimal) return r;

  const double base = kPowerBaseMw;
  Extractor ex{model.idx, sol.primal, sol.row_dual, base};
  r.total_cost = sol.objective * base;
  r.generation_mw = ex.primal_grid(model.idx.var_pg, base);
  r.flow_mw = ex.primal_grid(model.idx.var_flow, base);
  r.angle_rad = ex.primal_grid(model.idx.var_theta, 1.0);
  r.charge_mw = ex.primal_grid(model.idx.var_charge, base);
  r.discharge_mw = ex.primal_grid(model.idx.var_discharge, base);
  r.soc_mwh = ex.primal_grid(model.idx.var_soc, base);
  r.lmp = ex.dual_grid(model.idx.row_balance);
  r.rho_plus = ex.dual_grid(model.idx.row_fmax);
  r.rho_minus = ex.dual_grid(model.idx.row_fmin);
  r.z = ex.dual_grid(model.idx.row_flowlaw);
  r.gamma_plus = ex.dual_grid(model.idx.row_gmax);
  r.gamma_minus = ex.dual_grid(model.idx.row_gmin);
  r.alpha = ex.dual_grid(model.idx.row_soc_recursion);
  r.beta_minus = ex.dual_grid(model.idx.row_soc_min);
  r.beta_plus = ex.dual_grid(model.idx.row_soc_max);
  r.tau_plus = ex.dual_grid(model.idx.row_charge_nonneg);
  r.tau_minus = ex.dual_grid(model.idx.row_discharge_nonneg);
  return r;
}

StorageCombinedResult solve_storage_combined(const Network& network,
                                             const Horizon& horizon,
                                             const SolveOptions& options) {
  DispatchLp first = build_dispatch_lp(network, horizon_inputs(network, horizon));
  LpSolution stage1 = solve_lp(first.lp, options);
  if (stage1.status != SolveStatus::Optimal)
    throw InfeasibleError(std::string("storage combined model requires an optimal "
                                      "first layer; got ") +
                          to_string(stage1.status));
  TwoLayerLp tl = build_two_layer(first.lp, first.emission_objective,
                                  std::abs(stage1.objective));
  LpSolution sol = solve_lp(tl.lp, options);
  if (sol.status != SolveStatus::Optimal)
    throw InternalError(std::string("storage combined solve returned ") +
                        to_string(sol.status));

  const double base = kPowerBaseMw;
  const auto& ix = first.idx;
  StorageCombinedResult r;
  r.iterations = sol.iterations;
  r.total_emissions = sol.objective * base;

  Extractor pex{ix, sol.primal, sol.row_dual, base};
  r.generation_mw = pex.primal_grid(ix.var_pg, base);
  r.flow_mw = pex.primal_grid(ix.var_flow, base);
  r.angle_rad = pex.primal_grid(ix.var_theta, 1.0);
  r.charge_mw = pex.primal_grid(ix.var_charge, base);
  r.discharge_mw = pex.primal_grid(ix.var_discharge, base);
  r.soc_mwh = pex.primal_grid(ix.var_soc, base);

  double cost = 0.0;
  for (int j = 0; j < first.lp.num_variables(); ++j)
    cost += first.cost_objective[j] * sol.primal[j];
  r.dispatch_cost = cost * base;

  auto embedded = [&](const std::vector<std::vector<int>>& rows) {
    std::vector<std::vector<double>> out(rows.size());
    for (size_t t = 0; t < rows.size(); ++t)
      for (int row : rows[t]) out[t].push_back(sol.primal[tl.dual_var(row)]);
    return out;
  };
  r.pi = embedded(ix.row_balance);
  r.rho_plus = embedded(ix.row_fmax);
  r.rho_minus = embedded(ix.row_fmin);
  r.z = embedded(ix.row_flowlaw);
  r.gamma_plus = embedded(ix.row_gmax);
  r.gamma_minus = embedded(ix.row_gmin);
  r.alpha = embedded(ix.row_soc_recursion);
  r.beta_minus = embedded(ix.row_soc_min);
  r.beta_plus = embedded(ix.row_soc_max);
  r.tau_plus = embedded(ix.row_charge_nonneg);
  r.tau_minus = embedded(ix.row_discharge_nonneg);

  Extractor dex{ix, sol.primal, sol.row_dual, base};
  r.p_pi = dex.dual_grid(ix.row_balance);
  r.p_rho_plus = dex.dual_grid(ix.row_fmax);
  r.p_rho_minus = dex.dual_grid(ix.row_fmin);
  r.p_z = dex.dual_grid(ix.row_flowlaw);
  r.p_gamma_plus = dex.dual_grid(ix.row_gmax);
  r.p_gamma_minus = dex.dual_grid(ix.row_gmin);
  r.p_alpha = dex.dual_grid(ix.row_soc_recursion);
  r.p_beta_minus = dex.dual_grid(ix.row_soc_min);
  r.p_beta_plus = dex.dual_grid(ix.row_soc_max);
  r.p_tau_plus = dex.dual_grid(ix.row_charge_nonneg);
  r.p_tau_minus = dex.dual_grid(ix.row_discharge_nonneg);
  r.p_o = sol.row_dual[tl.strong_duality_row] / tl.strong_duality_scale;

  const int T = horizon.periods();
  r.lme_value.resize(T);
  r.sci_value.resize(T);
  r.period_emissions.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int n = 0; n < network.num_nodes(); ++n)
      r.lme_value[t].push_back(r.p_pi[t][n] + r.p_o * r.pi[t][n]);
    for (int l = 0; l < network.num_lines(); ++l)
      r.sci_value[t].push_back(r.p_rho_plus[t][l] - r.p_rho_minus[t][l] +
                               r.p_o * (r.rho_plus[t][l] - r.rho_minus[t][l]));
    for (int g = 0; g < network.num_generators(); ++g)
      r.period_emissions[t] +=
          network.generators()[g].emission_rate * r.generation_mw[t][g];
  }
  return r;
}

CarbonLedger storage_ledger(const Network& network, const Horizon& horizon,
                            const StorageCombinedResult& result) {
  const int T = horizon.periods();
  CarbonLedger led;
  led.periods = T;
  led.load_account.resize(T);
  led.generator_account.resize(T);
  led.line_account.resize(T);
  led.storage_account.resize(T);
  led.generation_mwh = result.generation_mw;
  led.period_emissions = result.period_emissions;
  for (int t = 0; t < T; ++t) {
    for (int n = 0; n < network.num_nodes(); ++n)
      led.load_account[t].push_back(result.lme_value[t][n] *
                                    horizon.demand_mw[t][n]);
    for (int g = 0; g < network.num_generators(); ++g) {
      const auto& gen = network.generators()[g];
      const double rate =
          gen.emission_rate - result.lme_value[t][network.generator_node(g)];
      led.generator_account[t].push_back(rate * result.generation_mw[t][g]);
    }
    for (int l = 0; l < network.num_lines(); ++l)
      led.line_account[t].push_back(result.sci_value[t][l] *
                                    std::abs(result.flow_mw[t][l]));
    for (int s = 0; s < network.num_storages(); ++s) {
      const double net = result.charge_mw[t][s] - result.discharge_mw[t][s];
      led.storage_account[t].push_back(
          result.lme_value[t][network.storage_node(s)] * net);
    }
    led.total_emissions += result.period_emissions[t];
  }
  led.footprint_residual = std::abs(led.signed_residual());
  return led;
}

namespace {

// Decentralized storage problem for one unit: the central storage
// constraint block priced at its node's LMPs, then LMEs.
struct StorageLp {
  LinearProgram lp;
  std::vector<int> var_charge, var_discharge, var_soc;  // [t], [t], [k]
  std::vector<double> primary, secondary;
};

StorageLp build_storage_decentralized(const Network& network, const Horizon& horizon,
                                      const StorageCombinedResult& result, int s) {
  const int T = horizon.periods();
  const auto& st = network.storages()[s];
  const int node = network.storage_node(s);
  const double base = kPowerBaseMw;
  const double e0 = (s < static_cast<int>(horizon.initial_soc_mwh.size())
                         ? horizon.initial_soc_mwh[s]
                         : 0.0) /
                    base;
  StorageLp out;
  auto& lp = out.lp;
  for (int t = 0; t < T; ++t)
    out.var_charge.push_back(lp.add_variable("chg[" + std::to_string(t) + "]"));
  for (int t = 0; t < T; ++t)
    out.var_discharge.push_back(lp.add_variable("dis[" + std::to_string(t) + "]"));
  for (int k = 0; k <= T; ++k)
    out.var_soc.push_back(lp.add_variable("soc[" + std::to_string(k) + "]"));

  lp.add_row("init", {{out.var_soc[0], 1.0}}, RowSense::Equal, e0);
  for (int t = 0; t < T; ++t) {
    lp.add_row("soc[" + std::to_string(t) + "]",
               {{out.var_soc[t], 1.0},
                {out.var_charge[t], st.efficiency},
                {out.var_discharge[t], -1.0 / st.efficiency},
                {out.var_soc[t + 1], -1.0}},
               RowSense::Equal, 0.0);
    lp.add_row("chgpos[" + std::to_string(t) + "]", {{out.var_charge[t], 1.0}},
               RowSense::GreaterEqual, 0.0);
    lp.add_row("dispos[" + std::to_string(t) + "]", {{out.var_discharge[t], 1.0}},
               RowSense::GreaterEqual, 0.0);
    lp.add_row("socmin[" + std::to_string(t) + "]", {{out.var_soc[t], 1.0}},
               RowSense::GreaterEqual, 0.0);
    lp.add_row("socmax[" + std::to_string(t) + "]", {{out.var_soc[t], 1.0}},
               RowSense::LessEqual, st.e_max_mwh / base);
    if (st.power_cap_mw) {
      lp.add_row("chgcap[" + std::to_string(t) + "]", {{out.var_charge[t], 1.0}},
                 RowSense::LessEqual, *st.power_cap_mw / base);
      lp.add_row("discap[" + std::to_string(t) + "]", {{out.var_discharge[t], 1.0}},
                 RowSense::LessEqual, *st.power_cap_mw / base);
    }
  }
  lp.add_row("socend", {{out.var_soc[T], 1.0}}, RowSense::GreaterEqual, 0.0);

  out.primary.assign(lp.num_variables(), 0.0);
  out.secondary.assign(lp.num_variables(), 0.0);
  for (int t = 0; t < T; ++t) {
    const double lmp = result.pi[t][node];
    const double lme = result.lme_value[t][node];
    out.primary[out.var_charge[t]] = lmp;
    out.primary[out.var_discharge[t]] = -lmp;
    out.secondary[out.var_charge[t]] = lme;
    out.secondary[out.var_discharge[t]] = -lme;
  }
  return out;
}

}  // namespace

StorageEquilibriumReport check_storage_equilibrium(const Network& network,
                                                   const Horizon& horizon,
                                                   const StorageCombinedResult& result,
                                                   const SolveOptions& options) {
  StorageEquilibriumReport report;
  const int T = horizon.periods();
  const double base = kPowerBaseMw;
  const double tol = std::max(options.tol, 1e-8);

  for (int s = 0; s < network.num_storages(); ++s) {
    const auto& st = network.storages()[s];
    const int node = network.storage_node(s);
    StorageLp dec = build_storage_decentralized(network, horizon, result, s);
    LexicographicResult lex =
        lexicographic_solve(dec.lp, dec.primary, dec.secondary, options);
    if (lex.solution.status != SolveStatus::Optimal) {
      report.violations.push_back({st.id, "decentralized problem unsolved", 0.0});
      continue;
    }

    double central_primary = 0.0, central_secondary = 0.0;
    for (int t = 0; t < T; ++t) {
      const double net =
          (result.charge_mw[t][s] - result.discharge_mw[t][s]) / base;
      central_primary += result.pi[t][node] * net;
      central_secondary += result.lme_value[t][node] * net;
    }
    const double scale1 = 1.0 + std::abs(lex.primary_value);
    if (central_primary > lex.primary_value + 1e2 * tol * scale1)
      report.violations.push_back({st.id, "economic arbitrage suboptimal",
                                   central_primary - lex.primary_value});
    const double scale2 = 1.0 + std::abs(lex.solution.objective);
    if (central_secondary > lex.solution.objective + 1e2 * tol * scale2)
      report.violations.push_back({st.id, "carbon account suboptimal",
                                   central_secondary - lex.solution.objective});

    // Sufficiency spot check: pin alternative decentralized-optimal
    // schedules and re-dispatch. Cost must not drop; at equal cost,
    // emissions must not drop.
    LinearProgram face = dec.lp;
    for (int j = 0; j < face.num_variables(); ++j) face.set_objective(j, 0.0);
    std::vector<LpTerm> prim, sec;
    for (int j = 0; j < face.num_variables(); ++j) {
      if (dec.primary[j] != 0.0) prim.push_back({j, dec.primary[j]});
      if (dec.secondary[j] != 0.0) sec.push_back({j, dec.secondary[j]});
    }
    face.add_row("opt:primary", prim, RowSense::LessEqual, lex.primary_value);
    face.add_row("opt:secondary", sec, RowSense::LessEqual, lex.solution.objective);

    std::vector<std::vector<double>> schedules;
    for (int probe = 0; probe < 4; ++probe) {
      LinearProgram probe_lp = face;
      for (int t = 0; t < T; ++t) {
        const double w = (probe % 2 == 0) ? 1.0 : -1.0;
        const double phase = (probe < 2) ? 1.0 : ((t % 2 == 0) ? 1.0 : -1.0);
        probe_lp.set_objective(dec.var_charge[t], w * phase);
        probe_lp.set_objective(dec.var_discharge[t], -w * phase);
      }
      LpSolution alt = solve_lp(probe_lp, options);
      if (alt.status != SolveStatus::Optimal) continue;
      std::vector<double> sched(2 * T);
      for (int t = 0; t < T; ++t) {
        sched[t] = alt.primal[dec.var_charge[t]];
        sched[T + t] = alt.primal[dec.var_discharge[t]];
      }
      bool dup = false;
      for (const auto& other : schedules) {
        double diff = 0.0;
        for (int k = 0; k < 2 * T; ++k) diff = std::max(diff, std::abs(other[k] - sched[k]));
        if (diff < 1e-7) dup = true;
      }
      bool is_central = true;
      for (int t = 0; t < T && is_central; ++t)
        if (std::abs(sched[t] - result.charge_mw[t][s] / base) > 1e-7 ||
            std::abs(sched[T + t] - result.discharge_mw[t][s] / base) > 1e-7)
          is_central = false;
      if (!dup && !is_central) schedules.push_back(std::move(sched));
    }

    for (const auto& sched : schedules) {
      ++report.alternatives_checked;
      DispatchLp pinned = build_dispatch_lp(network, horizon_inputs(network, horizon));
      for (int t = 0; t < T; ++t) {
        pinned.lp.add_row("pin:chg[" + std::to_string(t) + "]",
                          {{pinned.idx.var_charge[t][s], 1.0}}, RowSense::Equal,
                          sched[t]);
        pinned.lp.add_row("pin:dis[" + std::to_string(t) + "]",
                          {{pinned.idx.var_discharge[t][s], 1.0}}, RowSense::Equal,
                          sched[T + t]);
      }
      LexicographicResult redispatch;
      try {
        redispatch = lexicographic_solve(pinned.lp, pinned.cost_objective,
                                         pinned.emission_objective, options);
      } catch (const SolverError&) {
        ++report.alternatives_infeasible;
        continue;
      }
      if (redispatch.solution.status != SolveStatus::Optimal) {
        ++report.alternatives_infeasible;
        continue;
      }
      const double cost = redispatch.primary_value * base;
      const double emis = redispatch.solution.objective * base;
      const double cscale = 1.0 + std::abs(result.dispatch_cost);
      if (cost < result.dispatch_cost - 1e2 * tol * cscale) {
        report.violations.push_back(
            {st.id, "alternative schedule reduced cost", result.dispatch_cost - cost});
      } else if (std::abs(cost - result.dispatch_cost) <= 1e2 * tol * cscale &&
                 emis < result.total_emissions -
                            1e2 * tol * (1.0 + std::abs(result.total_emissions))) {
        report.violations.push_back({st.id, "alternative schedule reduced emissions",
                                     result.total_emissions - emis});
      }
    }
  }
  return report;
}

}  // namespace lmegrid
