// Per-entity carbon accounts and the footprint identity.
//
// Accounts per period: load at LME * P^D, generator at (sigma - LME) * P^G,
// line at SCI * |f|, storage at LME * (charge - discharge). Their sum equals
// total physical emissions up to solver tolerance; the ledger records the
// residual.
#pragma once

#include <iosfwd>
#include <vector>

#include "lmegrid/combined.hpp"
#include "lmegrid/network.hpp"

namespace lmegrid {

struct CarbonLedger {
  int periods = 1;
  std::vector<std::vector<double>> load_account;       // [t][node] kgCO2
  std::vector<std::vector<double>> generator_account;  // [t][generator]
  std::vector<std::vector<double>> line_account;       // [t][line]
  std::vector<std::vector<double>> storage_account;    // [t][storage]
  std::vector<std::vector<double>> generation_mwh;     // [t][generator], for summaries
  std::vector<double> period_emissions;                // [t] kgCO2
  double total_emissions = 0.0;
  double footprint_residual = 0.0;  // |sum of all accounts - total_emissions|

  double account_sum() const;
  double signed_residual() const { return account_sum() - total_emissions; }
};

CarbonLedger build_ledger(const Network& network, const CombinedResult& combined);

// Aggregate of ledgers from the same network topology (summed per entity,
// per entity class, and per generator-type tag).
struct TypeSummaryRow {
  GeneratorType type = GeneratorType::Other;
  double account = 0.0;       // kgCO2
  double dispatch_mwh = 0.0;
  double scope1 = 0.0;        // kgCO2
};

struct AggregateSummary {
  double load_account = 0.0;
  double generator_account = 0.0;
  double line_account = 0.0;
  double storage_account = 0.0;
  double total_emissions = 0.0;
  double footprint_residual = 0.0;
  std::vector<double> load_by_node, generator_by_id, line_by_id, storage_by_id;
  std::vector<TypeSummaryRow> by_type;  // only types present in the network
};

AggregateSummary aggregate_ledgers(const Network& network,
                                   const std::vector<CarbonLedger>& ledgers);

// CSV: entity_kind,entity_id,period,account_kgco2
void write_ledger_csv(const Network& network, const CarbonLedger& ledger,
                      std::ostream& out);
// CSV: type,account_kgco2,dispatch_mwh,scope1_kgco2
void write_type_summary_csv(const std::vector<TypeSummaryRow>& rows,
                            std::ostream& out);

}  // namespace lmegrid
