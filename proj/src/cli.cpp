#include "lmegrid/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <variant>

#include <json.hpp>

#include "lmegrid/accounting.hpp"
#include "lmegrid/combined.hpp"
#include "lmegrid/multiperiod.hpp"
#include "lmegrid/network_io.hpp"
#include "lmegrid/verify.hpp"

namespace lmegrid {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitValidation = 2;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

using Cell = std::variant<std::string, double, int>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

void write_table(const Table& t, const std::string& format, std::ostream& out) {
  if (format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json obj;
      for (size_t c = 0; c < t.columns.size(); ++c) {
        const Cell& cell = row[c];
        if (std::holds_alternative<double>(cell))
          obj[t.columns[c]] = std::get<double>(cell);
        else if (std::holds_alternative<int>(cell))
          obj[t.columns[c]] = std::get<int>(cell);
        else
          obj[t.columns[c]] = std::get<std::string>(cell);
      }
      arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << "\n";
    return;
  }
  for (size_t c = 0; c < t.columns.size(); ++c)
    out << (c ? "," : "") << t.columns[c];
  out << "\n";
  for (const auto& row : t.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ",";
      const Cell& cell = row[c];
      if (std::holds_alternative<double>(cell))
        out << fmt(std::get<double>(cell));
      else if (std::holds_alternative<int>(cell))
        out << std::get<int>(cell);
      else
        out << std::get<std::string>(cell);
    }
    out << "\n";
  }
}

void emit_file(const RunConfig& cfg, const std::string& stem, const Table& t) {
  fs::create_directories(cfg.out_dir);
  const std::string ext = cfg.format == "json" ? ".json" : ".csv";
  std::ofstream out(fs::path(cfg.out_dir) / (stem + ext), std::ios::binary);
  if (!out)
    throw ValidationError(ValidationError::Kind::Schema, stem,
                          "cannot write output file '" + stem + ext + "'");
  write_table(t, cfg.format, out);
}

Network load(const RunConfig& cfg) {
  LoadOptions opt;
  opt.allow_negative_demand = cfg.allow_negative_demand;
  opt.default_storage_efficiency = cfg.default_storage_efficiency;
  Network net = load_network_file(cfg.network_path, opt);
  if (!cfg.ref_node.empty()) net = net.with_reference_node(cfg.ref_node);
  return net;
}

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.tol = cfg.tol;
  return o;
}

int cmd_validate(const RunConfig& cfg) {
  Network net = load(cfg);
  ordered_json report;
  report["status"] = "ok";
  report["nodes"] = net.num_nodes();
  report["lines"] = net.num_lines();
  report["generators"] = net.num_generators();
  report["storages"] = net.num_storages();
  report["reference_node"] = net.reference_node();
  std::cout << report.dump() << "\n";
  return kExitOk;
}

int cmd_dispatch(const RunConfig& cfg) {
  Network net = load(cfg);
  DispatchResult r = solve_dcopf(net, solve_options(cfg));
  if (r.status != SolveStatus::Optimal) {
    std::cerr << "dispatch failed: " << to_string(r.status) << "\n";
    return kExitSolver;
  }
  Table t;
  t.columns = {"entity_kind", "entity_id", "quantity", "value"};
  for (int g = 0; g < net.num_generators(); ++g)
    t.add({std::string("generator"), net.generators()[g].id,
           std::string("generation_mw"), r.generation_mw[g]});
  for (int l = 0; l < net.num_lines(); ++l)
    t.add({std::string("line"), net.lines()[l].id, std::string("flow_mw"),
           r.flow_mw[l]});
  for (int n = 0; n < net.num_nodes(); ++n)
    t.add({std::string("node"), net.nodes()[n].id, std::string("lmp"), r.lmp[n]});
  for (int n = 0; n < net.num_nodes(); ++n)
    t.add({std::string("node"), net.nodes()[n].id, std::string("angle_rad"),
           r.angle_rad[n]});
  emit_file(cfg, "dispatch", t);
  std::cout << "total_cost " << fmt(r.total_cost) << "\n";
  return kExitOk;
}

int cmd_lme(const RunConfig& cfg) {
  Network net = load(cfg);
  CombinedResult r = solve_combined(net, solve_options(cfg));
  NodalLme lmes = lme(r, net);
  LineSci scis = sci(r, net);
  Table tn;
  tn.columns = {"node_id", "lme_kgco2_per_mwh"};
  for (int n = 0; n < net.num_nodes(); ++n)
    tn.add({net.nodes()[n].id, lmes.value[n]});
  emit_file(cfg, "lme", tn);
  Table tl;
  tl.columns = {"line_id", "sci_kgco2_per_mwh"};
  for (int l = 0; l < net.num_lines(); ++l)
    tl.add({net.lines()[l].id, scis.value[l]});
  emit_file(cfg, "sci", tl);
  std::cout << "total_emissions " << fmt(r.total_emissions) << "\n";
  return kExitOk;
}

Table ledger_table(const Network& net, const CarbonLedger& led) {
  Table t;
  t.columns = {"entity_kind", "entity_id", "period", "account_kgco2"};
  for (int p = 0; p < led.periods; ++p) {
    for (int n = 0; n < net.num_nodes(); ++n)
      t.add({std::string("load"), net.nodes()[n].id, p, led.load_account[p][n]});
    for (int g = 0; g < net.num_generators(); ++g)
      t.add({std::string("generator"), net.generators()[g].id, p,
             led.generator_account[p][g]});
    for (int l = 0; l < net.num_lines(); ++l)
      t.add({std::string("line"), net.lines()[l].id, p, led.line_account[p][l]});
    for (int s = 0; s < net.num_storages() &&
                    s < static_cast<int>(led.storage_account[p].size());
         ++s)
      t.add({std::string("storage"), net.storages()[s].id, p,
             led.storage_account[p][s]});
  }
  return t;
}

int cmd_accounts(const RunConfig& cfg) {
  Network net = load(cfg);
  CombinedResult r = solve_combined(net, solve_options(cfg));
  CarbonLedger led = build_ledger(net, r);
  emit_file(cfg, "ledger", ledger_table(net, led));
  std::cout << "total_emissions " << fmt(led.total_emissions) << "\n";
  std::cout << "footprint_residual " << fmt(led.footprint_residual) << "\n";
  return kExitOk;
}

struct PeriodOutcome {
  bool solved = false;
  std::string error;
  std::vector<double> lme;  // per node
  std::vector<double> sci;  // per line
  CarbonLedger ledger;
};

int cmd_scenario(const RunConfig& cfg) {
  Network net = load(cfg);
  if (cfg.demand_path.empty())
    throw ValidationError(ValidationError::Kind::Schema, "",
                          "scenario command requires --demand");
  Scenario sc = load_scenario_file(cfg.demand_path, net);
  const int T = sc.num_periods();
  std::vector<PeriodOutcome> outcomes(T);

  const int workers = std::max(1, cfg.workers);
  std::atomic<int> next{0};
  auto work = [&]() {
    while (true) {
      const int t = next.fetch_add(1);
      if (t >= T) break;
      auto& out = outcomes[t];
      try {
        Network period_net = apply_scenario_period(net, sc, t);
        CombinedResult r = solve_combined(period_net, solve_options(cfg));
        out.lme = lme(r, period_net).value;
        out.sci = sci(r, period_net).value;
        out.ledger = build_ledger(period_net, r);
        out.solved = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  // Per-period files.
  Table lme_t;
  lme_t.columns = {"period", "node_id", "lme_kgco2_per_mwh"};
  Table sci_t;
  sci_t.columns = {"period", "line_id", "sci_kgco2_per_mwh"};
  Table led_t;
  led_t.columns = {"entity_kind", "entity_id", "period", "account_kgco2"};
  std::vector<CarbonLedger> solved_ledgers;
  for (int t = 0; t < T; ++t) {
    if (!outcomes[t].solved) continue;
    for (int n = 0; n < net.num_nodes(); ++n)
      lme_t.add({t, net.nodes()[n].id, outcomes[t].lme[n]});
    for (int l = 0; l < net.num_lines(); ++l)
      sci_t.add({t, net.lines()[l].id, outcomes[t].sci[l]});
    Table one = ledger_table(net, outcomes[t].ledger);
    for (auto& row : one.rows) {
      row[2] = t;  // ledger period column carries the scenario period
      led_t.rows.push_back(std::move(row));
    }
    solved_ledgers.push_back(outcomes[t].ledger);
  }
  emit_file(cfg, "lme_periods", lme_t);
  emit_file(cfg, "sci_periods", sci_t);
  emit_file(cfg, "ledger_periods", led_t);

  // Aggregates: overall mean, hour-of-day buckets, month buckets.
  const int ppd = std::max(1, cfg.periods_per_day);
  std::vector<double> mean(net.num_nodes(), 0.0);
  std::map<int, std::pair<std::vector<double>, int>> hourly, monthly;
  int solved_count = 0;
  for (int t = 0; t < T; ++t) {
    if (!outcomes[t].solved) continue;
    ++solved_count;
    const int hour = t % ppd;
    int month = 0;
    if (sc.periods[t].month) {
      month = *sc.periods[t].month;
    } else {
      // Uniform 12-way split of the period range.
      month = std::min(11, 12 * t / std::max(1, T));
    }
    auto& hb = hourly[hour];
    auto& mb = monthly[month];
    if (hb.first.empty()) hb.first.assign(net.num_nodes(), 0.0);
    if (mb.first.empty()) mb.first.assign(net.num_nodes(), 0.0);
    for (int n = 0; n < net.num_nodes(); ++n) {
      mean[n] += outcomes[t].lme[n];
      hb.first[n] += outcomes[t].lme[n];
      mb.first[n] += outcomes[t].lme[n];
    }
    ++hb.second;
    ++mb.second;
  }
  Table mean_t;
  mean_t.columns = {"node_id", "mean_lme_kgco2_per_mwh"};
  for (int n = 0; n < net.num_nodes(); ++n)
    mean_t.add({net.nodes()[n].id,
                solved_count ? mean[n] / solved_count : 0.0});
  emit_file(cfg, "lme_mean", mean_t);

  Table hour_t;
  hour_t.columns = {"hour", "node_id", "mean_lme_kgco2_per_mwh"};
  for (const auto& [hour, bucket] : hourly)
    for (int n = 0; n < net.num_nodes(); ++n)
      hour_t.add({hour, net.nodes()[n].id, bucket.first[n] / bucket.second});
  emit_file(cfg, "lme_by_hour", hour_t);

  Table month_t;
  month_t.columns = {"month", "node_id", "mean_lme_kgco2_per_mwh"};
  for (const auto& [month, bucket] : monthly)
    for (int n = 0; n < net.num_nodes(); ++n)
      month_t.add({month, net.nodes()[n].id, bucket.first[n] / bucket.second});
  emit_file(cfg, "lme_by_month", month_t);

  AggregateSummary agg = aggregate_ledgers(net, solved_ledgers);
  Table type_t;
  type_t.columns = {"type", "account_kgco2", "dispatch_mwh", "scope1_kgco2"};
  for (const auto& row : agg.by_type)
    type_t.add({std::string(to_string(row.type)), row.account, row.dispatch_mwh,
                row.scope1});
  emit_file(cfg, "accounts_by_type", type_t);

  ordered_json summary;
  summary["periods"] = T;
  summary["solved"] = solved_count;
  summary["failed"] = ordered_json::array();
  for (int t = 0; t < T; ++t)
    if (!outcomes[t].solved)
      summary["failed"].push_back({{"period", t}, {"error", outcomes[t].error}});
  summary["total_emissions"] = agg.total_emissions;
  summary["footprint_residual"] = agg.footprint_residual;
  fs::create_directories(cfg.out_dir);
  std::ofstream sum_out(fs::path(cfg.out_dir) / "summary.json", std::ios::binary);
  sum_out << summary.dump(2) << "\n";
  std::cout << "periods " << T << " solved " << solved_count << " failed "
            << (T - solved_count) << "\n";
  return kExitOk;
}

int cmd_storage(const RunConfig& cfg) {
  Network net = load(cfg);
  if (cfg.demand_path.empty())
    throw ValidationError(ValidationError::Kind::Schema, "",
                          "storage command requires --demand");
  Horizon full = load_horizon_file(cfg.demand_path, net, cfg.capacity_path);
  const int T = full.periods();
  const int window = std::max(1, cfg.window);

  Table lme_t;
  lme_t.columns = {"period", "node_id", "lme_kgco2_per_mwh"};
  Table sci_t;
  sci_t.columns = {"period", "line_id", "sci_kgco2_per_mwh"};
  Table led_t;
  led_t.columns = {"entity_kind", "entity_id", "period", "account_kgco2"};
  double residual = 0.0, emissions = 0.0;

  for (int start = 0; start < T; start += window) {
    const int len = std::min(window, T - start);
    Horizon chunk;
    chunk.demand_mw.assign(full.demand_mw.begin() + start,
                           full.demand_mw.begin() + start + len);
    if (!full.capacity_factor.empty())
      chunk.capacity_factor.assign(full.capacity_factor.begin() + start,
                                   full.capacity_factor.begin() + start + len);
    chunk.initial_soc_mwh = full.initial_soc_mwh;  // windows restart the SOC
    StorageCombinedResult r = solve_storage_combined(net, chunk, solve_options(cfg));
    CarbonLedger led = storage_ledger(net, chunk, r);
    for (int t = 0; t < len; ++t) {
      for (int n = 0; n < net.num_nodes(); ++n)
        lme_t.add({start + t, net.nodes()[n].id, r.lme_value[t][n]});
      for (int l = 0; l < net.num_lines(); ++l)
        sci_t.add({start + t, net.lines()[l].id, r.sci_value[t][l]});
    }
    Table one = ledger_table(net, led);
    for (auto& row : one.rows) {
      row[2] = start + std::get<int>(row[2]);
      led_t.rows.push_back(std::move(row));
    }
    residual += led.footprint_residual;
    emissions += led.total_emissions;
  }
  emit_file(cfg, "lme_periods", lme_t);
  emit_file(cfg, "sci_periods", sci_t);
  emit_file(cfg, "ledger", led_t);
  std::cout << "total_emissions " << fmt(emissions) << "\n";
  std::cout << "footprint_residual " << fmt(residual) << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  Network net = load(cfg);
  const SolveOptions solve = solve_options(cfg);
  ordered_json checks = ordered_json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, bool pass, double residual,
                    double tolerance, const std::string& details = "") {
    ordered_json c;
    c["name"] = name;
    c["status"] = pass ? "pass" : "fail";
    c["residual"] = residual;
    c["tolerance"] = tolerance;
    if (!details.empty()) c["details"] = details;
    checks.push_back(std::move(c));
    all_pass = all_pass && pass;
  };
  auto record_skip = [&](const std::string& name, const std::string& why) {
    checks.push_back({{"name", name}, {"status", "skipped"}, {"details", why}});
  };

  CombinedResult combined = solve_combined(net, solve);
  NodalLme lmes = lme(combined, net);

  const double fp = footprint_residual(net, combined);
  record("carbon_footprint_identity", fp <= 1e-6, fp, 1e-6);

  const double oracle = emissions_at(net, solve);
  const double gap = std::abs(combined.total_emissions - oracle) /
                     (1.0 + std::abs(oracle));
  record("lexicographic_oracle_equivalence", gap <= 1e-6, gap, 1e-6);

  DispatchResult dispatch = solve_dcopf(net, solve);
  const double cost_gap = std::abs(combined.dispatch_cost - dispatch.total_cost) /
                          (1.0 + std::abs(dispatch.total_cost));
  record("cost_preservation", cost_gap <= 1e-6, cost_gap, 1e-6);

  double worst_fd = 0.0;
  int smooth_nodes = 0;
  for (int n = 0; n < net.num_nodes(); ++n) {
    FdOptions fd_opt;
    fd_opt.solve = solve;
    DirectionalSlope s = fd_lme(net, n, fd_opt);
    if (!s.smooth) continue;
    ++smooth_nodes;
    const double slope = 0.5 * (s.left_slope + s.right_slope);
    worst_fd = std::max(worst_fd, std::abs(lmes.value[n] - slope) /
                                      (1.0 + std::abs(slope)));
  }
  if (smooth_nodes > 0)
    record("finite_difference_lme", worst_fd <= 1e-5, worst_fd, 1e-5,
           std::to_string(smooth_nodes) + " smooth nodes");
  else
    record_skip("finite_difference_lme", "no smooth nodes detected");

  int ptdf_nodes = 0;
  double worst_ptdf = 0.0;
  for (int n = 0; n < net.num_nodes(); ++n) {
    PtdfResult p = ptdf_lme(net, dispatch, n);
    if (!p.accepted()) continue;
    ++ptdf_nodes;
    worst_ptdf = std::max(worst_ptdf, std::abs(p.value - lmes.value[n]) /
                                          (1.0 + std::abs(lmes.value[n])));
  }
  if (ptdf_nodes > 0)
    record("ptdf_equivalence", worst_ptdf <= 1e-6, worst_ptdf, 1e-6,
           std::to_string(ptdf_nodes) + " accepted nodes");
  else
    record_skip("ptdf_equivalence", "instance refused as degenerate");

  GenEquilibriumReport eq = check_generator_equilibrium(net, combined);
  record("generator_equilibrium", eq.clean(),
         static_cast<double>(eq.violations.size() + eq.selection_mismatches.size()),
         0.0,
         "checked " + std::to_string(eq.selections_checked) + " selections, " +
             std::to_string(eq.selections_infeasible) + " infeasible");

  // Continuity sweep at the highest-demand node.
  int sweep_node = 0;
  for (int n = 0; n < net.num_nodes(); ++n)
    if (net.nodes()[n].demand_mw > net.nodes()[sweep_node].demand_mw) sweep_node = n;
  const double span = 0.2 * std::max(10.0, net.nodes()[sweep_node].demand_mw);
  SweepCurve curve = sweep_emissions(net, sweep_node, -span, span, 41, solve);
  if (curve.alpha.size() >= 2) {
    double max_slope = 0.0;
    for (double s : curve.segment_slopes) max_slope = std::max(max_slope, std::abs(s));
    const double step = curve.alpha[1] - curve.alpha[0];
    const double bound = 4.0 * std::max(1.0, max_slope) * step + 1e-6;
    record("emissions_continuity", curve.max_adjacent_jump <= bound,
           curve.max_adjacent_jump, bound,
           std::to_string(curve.breakpoints.size()) + " breakpoints");
  } else {
    record_skip("emissions_continuity", "sweep domain empty");
  }

  if (net.num_storages() > 0 && !cfg.demand_path.empty()) {
    Horizon horizon = load_horizon_file(cfg.demand_path, net, cfg.capacity_path);
    StorageCombinedResult sr = solve_storage_combined(net, horizon, solve);
    CarbonLedger led = storage_ledger(net, horizon, sr);
    const double hres = led.footprint_residual / (1.0 + led.total_emissions);
    record("storage_footprint_identity", hres <= 1e-6, hres, 1e-6);
    double worst_period = 0.0;
    for (int t = 0; t < horizon.periods(); ++t) {
      double acc = 0.0;
      for (double v : led.load_account[t]) acc += v;
      for (double v : led.generator_account[t]) acc += v;
      for (double v : led.line_account[t]) acc += v;
      for (double v : led.storage_account[t]) acc += v;
      worst_period = std::max(worst_period, std::abs(acc - led.period_emissions[t]) /
                                                (1.0 + led.period_emissions[t]));
    }
    record("storage_per_period_identity", worst_period <= 1e-6, worst_period, 1e-6);
    StorageEquilibriumReport seq = check_storage_equilibrium(net, horizon, sr, solve);
    record("storage_equilibrium", seq.clean(),
           static_cast<double>(seq.violations.size()), 0.0,
           "checked " + std::to_string(seq.alternatives_checked) + " alternatives");
  }

  ordered_json report;
  report["checks"] = std::move(checks);
  report["all_passed"] = all_pass;
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / "verify_report.json", std::ios::binary);
  out << report.dump(2) << "\n";
  std::cout << report.dump(2) << "\n";
  return all_pass ? kExitOk : kExitSolver;
}

}  // namespace

int run_command(const RunConfig& cfg) {
  try {
    if (cfg.command == "validate") return cmd_validate(cfg);
    if (cfg.command == "dispatch") return cmd_dispatch(cfg);
    if (cfg.command == "lme") return cmd_lme(cfg);
    if (cfg.command == "accounts") return cmd_accounts(cfg);
    if (cfg.command == "scenario") return cmd_scenario(cfg);
    if (cfg.command == "storage") return cmd_storage(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    std::cerr << "unknown command '" << cfg.command << "'\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    ordered_json diag;
    diag["error"] = e.kind() == ValidationError::Kind::Schema ? "schema_violation"
                                                              : "semantic_violation";
    if (!e.entity().empty()) diag["entity"] = e.entity();
    diag["message"] = e.what();
    std::cerr << diag.dump() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    ordered_json diag;
    diag["error"] = "solver_failure";
    diag["message"] = e.what();
    std::cerr << diag.dump() << "\n";
    return kExitSolver;
  }
}

}  // namespace lmegrid
