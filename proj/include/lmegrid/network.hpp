// Typed network data model. A Network is immutable after construction and
// safe to share across concurrent solves; the with_* helpers return modified
// copies revalidated on the way out.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lmegrid {

class ValidationError : public std::runtime_error {
 public:
  enum class Kind { Schema, Semantic };
  ValidationError(Kind kind, std::string entity, const std::string& message)
      : std::runtime_error(message), kind_(kind), entity_(std::move(entity)) {}
  Kind kind() const { return kind_; }
  const std::string& entity() const { return entity_; }

 private:
  Kind kind_;
  std::string entity_;
};

enum class GeneratorType { Coal, Gas, Wind, Solar, Nuclear, Other };
const char* to_string(GeneratorType t);
std::optional<GeneratorType> generator_type_from_string(const std::string& s);

struct Node {
  std::string id;
  double demand_mw = 0.0;
};

struct Line {
  std::string id;
  std::string from;
  std::string to;
  double susceptance = 1.0;  // per-unit
  double f_max_mw = 0.0;
};

struct Generator {
  std::string id;
  std::string node;
  double cost_per_mwh = 0.0;
  double emission_rate = 0.0;  // kgCO2/MWh
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
  GeneratorType type = GeneratorType::Other;
};

struct StorageUnit {
  std::string id;
  std::string node;
  double e_max_mwh = 0.0;
  double efficiency = 1.0;  // eta in (0, 1]
  std::optional<double> power_cap_mw;  // absent = unlimited (the base model)
};

struct NetworkOptions {
  bool allow_negative_demand = false;
};

class Network {
 public:
  // Validates all invariants: unique ids, resolvable references, connected
  // line graph, coherent bounds. Throws ValidationError.
  static Network create(std::vector<Node> nodes, std::vector<Line> lines,
                        std::vector<Generator> generators,
                        std::vector<StorageUnit> storages,
                        std::string reference_node, NetworkOptions options = {});

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Generator>& generators() const { return generators_; }
  const std::vector<StorageUnit>& storages() const { return storages_; }
  const std::string& reference_node() const { return reference_; }
  const NetworkOptions& options() const { return options_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_lines() const { return static_cast<int>(lines_.size()); }
  int num_generators() const { return static_cast<int>(generators_.size()); }
  int num_storages() const { return static_cast<int>(storages_.size()); }

  int node_index(const std::string& id) const;  // -1 if unknown
  int reference_index() const { return ref_index_; }
  int line_from(int l) const { return line_from_[l]; }
  int line_to(int l) const { return line_to_[l]; }
  int generator_node(int g) const { return gen_node_[g]; }
  int storage_node(int s) const { return storage_node_[s]; }

  double total_demand_mw() const;

  Network with_demands(std::vector<double> demand_mw) const;
  Network with_generator_limits(std::vector<double> p_min_mw,
                                std::vector<double> p_max_mw) const;
  Network with_reference_node(const std::string& id) const;

  bool operator==(const Network& other) const;

 private:
  Network() = default;
  void index_and_validate();

  std::vector<Node> nodes_;
  std::vector<Line> lines_;
  std::vector<Generator> generators_;
  std::vector<StorageUnit> storages_;
  std::string reference_;
  NetworkOptions options_;

  std::unordered_map<std::string, int> node_lookup_;
  std::vector<int> line_from_, line_to_, gen_node_, storage_node_;
  int ref_index_ = -1;
};

// One scenario period: multiplicative scale per node demand and per
// generator p_max, aligned to network indexing. Values default to 1.
struct ScenarioPeriod {
  std::vector<double> load_scale;
  std::vector<double> capacity_factor;
  std::optional<int> month;
};

struct Scenario {
  std::vector<ScenarioPeriod> periods;
  int num_periods() const { return static_cast<int>(periods.size()); }
};

// P^D_i <- load_scale_i * P^D_i, P^max_g <- capacity_factor_g * P^max_g,
// p_min clamped to the scaled p_max.
Network apply_scenario_period(const Network& network, const Scenario& scenario,
                              int period);

}  // namespace lmegrid
