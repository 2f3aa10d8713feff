// JSON ingestion and emission for networks, CSV ingestion for scenarios.
//
// Network JSON schema (exact keys):
//   {"nodes":[{"id","demand"}],
//    "lines":[{"id","from","to","susceptance","f_max"}],
//    "generators":[{"id","node","cost","emission_rate","p_min","p_max"}],
//    "storages":[{"id","node","e_max","efficiency","power_cap"?}],
//    "reference_node"}
// p_min defaults to 0 when omitted. Generators accept an optional "type"
// tag (coal/gas/wind/solar/nuclear/other) used only for account grouping.
// Scenario CSV: header `period,entity_id,kind,value`,
// kind in {load_scale, capacity_factor}; an optional trailing `month`
// column assigns periods to month buckets.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "lmegrid/network.hpp"

namespace lmegrid {

struct LoadOptions {
  bool allow_negative_demand = false;
  // Applied when a storage entry omits "efficiency"; absent means the field
  // is required.
  std::optional<double> default_storage_efficiency;
};

Network load_network(const std::string& json_text, const LoadOptions& options = {});
Network load_network_file(const std::string& path, const LoadOptions& options = {});

std::string emit_network(const Network& network);
void emit_network_file(const Network& network, const std::string& path);

Scenario load_scenario(const std::string& csv_text, const Network& network);
Scenario load_scenario_file(const std::string& path, const Network& network);

}  // namespace lmegrid
