#include "lmegrid/accounting.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace lmegrid {

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);  // normalize -0
  return buf;
}
}  // namespace

double CarbonLedger::account_sum() const {
  double s = 0.0;
  auto add = [&s](const std::vector<std::vector<double>>& m) {
    for (const auto& row : m)
      for (double v : row) s += v;
  };
  add(load_account);
  add(generator_account);
  add(line_account);
  add(storage_account);
  return s;
}

CarbonLedger build_ledger(const Network& network, const CombinedResult& combined) {
  CarbonLedger led;
  led.periods = 1;
  const NodalLme lmes = lme(combined, network);
  const LineSci scis = sci(combined, network);

  led.load_account.resize(1);
  led.generator_account.resize(1);
  led.line_account.resize(1);
  led.storage_account.resize(1);
  led.generation_mwh.resize(1);
  for (int n = 0; n < network.num_nodes(); ++n)
    led.load_account[0].push_back(lmes.value[n] * network.nodes()[n].demand_mw);
  for (int g = 0; g < network.num_generators(); ++g) {
    const auto& gen = network.generators()[g];
    const double rate = gen.emission_rate - lmes.value[network.generator_node(g)];
    led.generator_account[0].push_back(rate * combined.generation_mw[g]);
    led.generation_mwh[0].push_back(combined.generation_mw[g]);
  }
  for (int l = 0; l < network.num_lines(); ++l)
    led.line_account[0].push_back(scis.value[l] * std::abs(combined.flow_mw[l]));
  led.storage_account[0].assign(network.num_storages(), 0.0);

  led.total_emissions = combined.total_emissions;
  led.period_emissions = {combined.total_emissions};
  led.footprint_residual = std::abs(led.signed_residual());
  return led;
}

AggregateSummary aggregate_ledgers(const Network& network,
                                   const std::vector<CarbonLedger>& ledgers) {
  AggregateSummary agg;
  agg.load_by_node.assign(network.num_nodes(), 0.0);
  agg.generator_by_id.assign(network.num_generators(), 0.0);
  agg.line_by_id.assign(network.num_lines(), 0.0);
  agg.storage_by_id.assign(network.num_storages(), 0.0);
  std::vector<double> dispatch_by_gen(network.num_generators(), 0.0);

  for (const auto& led : ledgers) {
    for (const auto& row : led.load_account)
      if (static_cast<int>(row.size()) != network.num_nodes())
        throw ValidationError(ValidationError::Kind::Semantic, "",
                              "aggregate_ledgers: ledger topology mismatch (nodes)");
    for (const auto& row : led.generator_account)
      if (static_cast<int>(row.size()) != network.num_generators())
        throw ValidationError(ValidationError::Kind::Semantic, "",
                              "aggregate_ledgers: ledger topology mismatch (generators)");
    for (const auto& row : led.line_account)
      if (static_cast<int>(row.size()) != network.num_lines())
        throw ValidationError(ValidationError::Kind::Semantic, "",
                              "aggregate_ledgers: ledger topology mismatch (lines)");

    for (const auto& row : led.load_account)
      for (int i = 0; i < network.num_nodes(); ++i) agg.load_by_node[i] += row[i];
    for (const auto& row : led.generator_account)
      for (int g = 0; g < network.num_generators(); ++g)
        agg.generator_by_id[g] += row[g];
    for (const auto& row : led.line_account)
      for (int l = 0; l < network.num_lines(); ++l) agg.line_by_id[l] += row[l];
    for (const auto& row : led.storage_account)
      for (int s = 0; s < std::min<int>(row.size(), network.num_storages()); ++s)
        agg.storage_by_id[s] += row[s];
    for (const auto& row : led.generation_mwh)
      for (int g = 0; g < std::min<int>(row.size(), network.num_generators()); ++g)
        dispatch_by_gen[g] += row[g];
    agg.total_emissions += led.total_emissions;
  }
  for (double v : agg.load_by_node) agg.load_account += v;
  for (double v : agg.generator_by_id) agg.generator_account += v;
  for (double v : agg.line_by_id) agg.line_account += v;
  for (double v : agg.storage_by_id) agg.storage_account += v;
  agg.footprint_residual =
      std::abs(agg.load_account + agg.generator_account + agg.line_account +
               agg.storage_account - agg.total_emissions);

  std::map<GeneratorType, TypeSummaryRow> rows;
  for (int g = 0; g < network.num_generators(); ++g) {
    const auto& gen = network.generators()[g];
    auto& row = rows[gen.type];
    row.type = gen.type;
    row.account += agg.generator_by_id[g];
    row.dispatch_mwh += dispatch_by_gen[g];
    row.scope1 += gen.emission_rate * dispatch_by_gen[g];
  }
  for (auto& [_, row] : rows) agg.by_type.push_back(row);
  return agg;
}

void write_ledger_csv(const Network& network, const CarbonLedger& ledger,
                      std::ostream& out) {
  out << "entity_kind,entity_id,period,account_kgco2\n";
  for (int t = 0; t < ledger.periods; ++t) {
    for (int n = 0; n < network.num_nodes(); ++n)
      out << "load," << network.nodes()[n].id << "," << t << ","
          << fmt(ledger.load_account[t][n]) << "\n";
    for (int g = 0; g < network.num_generators(); ++g)
      out << "generator," << network.generators()[g].id << "," << t << ","
          << fmt(ledger.generator_account[t][g]) << "\n";
    for (int l = 0; l < network.num_lines(); ++l)
      out << "line," << network.lines()[l].id << "," << t << ","
          << fmt(ledger.line_account[t][l]) << "\n";
    for (int s = 0; s < network.num_storages() &&
                    s < static_cast<int>(ledger.storage_account[t].size());
         ++s)
      out << "storage," << network.storages()[s].id << "," << t << ","
          << fmt(ledger.storage_account[t][s]) << "\n";
  }
}

void write_type_summary_csv(const std::vector<TypeSummaryRow>& rows,
                            std::ostream& out) {
  out << "type,account_kgco2,dispatch_mwh,scope1_kgco2\n";
  for (const auto& r : rows)
    out << to_string(r.type) << "," << fmt(r.account) << "," << fmt(r.dispatch_mwh)
        << "," << fmt(r.scope1) << "\n";
}

}  // namespace lmegrid
