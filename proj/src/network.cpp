#include "lmegrid/network.hpp"

#include <cmath>
#include <queue>

namespace lmegrid {

const char* to_string(GeneratorType t) {
  switch (t) {
    case GeneratorType::Coal: return "coal";
    case GeneratorType::Gas: return "gas";
    case GeneratorType::Wind: return "wind";
    case GeneratorType::Solar: return "solar";
    case GeneratorType::Nuclear: return "nuclear";
    case GeneratorType::Other: return "other";
  }
  return "other";
}

std::optional<GeneratorType> generator_type_from_string(const std::string& s) {
  if (s == "coal") return GeneratorType::Coal;
  if (s == "gas") return GeneratorType::Gas;
  if (s == "wind") return GeneratorType::Wind;
  if (s == "solar") return GeneratorType::Solar;
  if (s == "nuclear") return GeneratorType::Nuclear;
  if (s == "other") return GeneratorType::Other;
  return std::nullopt;
}

Network Network::create(std::vector<Node> nodes, std::vector<Line> lines,
                        std::vector<Generator> generators,
                        std::vector<StorageUnit> storages,
                        std::string reference_node, NetworkOptions options) {
  Network n;
  n.nodes_ = std::move(nodes);
  n.lines_ = std::move(lines);
  n.generators_ = std::move(generators);
  n.storages_ = std::move(storages);
  n.reference_ = std::move(reference_node);
  n.options_ = options;
  n.index_and_validate();
  return n;
}

void Network::index_and_validate() {
  using Kind = ValidationError::Kind;
  node_lookup_.clear();
  for (int i = 0; i < num_nodes(); ++i) {
    const auto& nd = nodes_[i];
    if (!node_lookup_.emplace(nd.id, i).second)
      throw ValidationError(Kind::Semantic, nd.id, "duplicate node id '" + nd.id + "'");
    if (!std::isfinite(nd.demand_mw))
      throw ValidationError(Kind::Semantic, nd.id,
                            "node '" + nd.id + "': demand is not finite");
    if (nd.demand_mw < 0 && !options_.allow_negative_demand)
      throw ValidationError(Kind::Semantic, nd.id,
                            "node '" + nd.id +
                                "': negative demand rejected (enable "
                                "allow_negative_demand to permit injections)");
  }
  if (nodes_.empty())
    throw ValidationError(Kind::Semantic, "", "network has no nodes");

  auto resolve = [&](const std::string& id, const std::string& owner) {
    auto it = node_lookup_.find(id);
    if (it == node_lookup_.end())
      throw ValidationError(Kind::Semantic, owner,
                            "'" + owner + "' references unknown node '" + id + "'");
    return it->second;
  };

  line_from_.resize(lines_.size());
  line_to_.resize(lines_.size());
  std::unordered_map<std::string, int> seen_line;
  for (int l = 0; l < num_lines(); ++l) {
    const auto& ln = lines_[l];
    if (!seen_line.emplace(ln.id, l).second)
      throw ValidationError(Kind::Semantic, ln.id, "duplicate line id '" + ln.id + "'");
    line_from_[l] = resolve(ln.from, ln.id);
    line_to_[l] = resolve(ln.to, ln.id);
    if (line_from_[l] == line_to_[l])
      throw ValidationError(Kind::Semantic, ln.id,
                            "line '" + ln.id + "': from and to are the same node");
    if (!(ln.susceptance > 0) || !std::isfinite(ln.susceptance))
      throw ValidationError(Kind::Semantic, ln.id,
                            "line '" + ln.id + "': susceptance must be > 0");
    if (!(ln.f_max_mw > 0) || !std::isfinite(ln.f_max_mw))
      throw ValidationError(Kind::Semantic, ln.id,
                            "line '" + ln.id + "': f_max must be > 0");
  }

  gen_node_.resize(generators_.size());
  std::unordered_map<std::string, int> seen_gen;
  for (int g = 0; g < num_generators(); ++g) {
    const auto& gen = generators_[g];
    if (!seen_gen.emplace(gen.id, g).second)
      throw ValidationError(Kind::Semantic, gen.id,
                            "duplicate generator id '" + gen.id + "'");
    gen_node_[g] = resolve(gen.node, gen.id);
    if (!std::isfinite(gen.cost_per_mwh))
      throw ValidationError(Kind::Semantic, gen.id,
                            "generator '" + gen.id + "': cost is not finite");
    if (!(gen.emission_rate >= 0) || !std::isfinite(gen.emission_rate))
      throw ValidationError(Kind::Semantic, gen.id,
                            "generator '" + gen.id + "': emission_rate must be >= 0");
    if (!(gen.p_min_mw >= 0) || !(gen.p_min_mw <= gen.p_max_mw) ||
        !std::isfinite(gen.p_max_mw))
      throw ValidationError(
          Kind::Semantic, gen.id,
          "generator '" + gen.id + "': requires 0 <= p_min <= p_max");
  }

  storage_node_.resize(storages_.size());
  std::unordered_map<std::string, int> seen_sto;
  for (int s = 0; s < num_storages(); ++s) {
    const auto& st = storages_[s];
    if (!seen_sto.emplace(st.id, s).second)
      throw ValidationError(Kind::Semantic, st.id,
                            "duplicate storage id '" + st.id + "'");
    storage_node_[s] = resolve(st.node, st.id);
    if (!(st.e_max_mwh > 0) || !std::isfinite(st.e_max_mwh))
      throw ValidationError(Kind::Semantic, st.id,
                            "storage '" + st.id + "': e_max must be > 0");
    if (!(st.efficiency > 0) || !(st.efficiency <= 1))
      throw ValidationError(Kind::Semantic, st.id,
                            "storage '" + st.id + "': efficiency must be in (0, 1]");
    if (st.power_cap_mw && !(*st.power_cap_mw > 0))
      throw ValidationError(Kind::Semantic, st.id,
                            "storage '" + st.id + "': power_cap must be > 0");
  }

  auto ref = node_lookup_.find(reference_);
  if (ref == node_lookup_.end())
    throw ValidationError(Kind::Semantic, reference_,
                          "reference_node '" + reference_ + "' does not exist");
  ref_index_ = ref->second;

  // Single connected component over the line graph.
  if (num_nodes() > 1) {
    std::vector<char> seen(num_nodes(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    std::vector<std::vector<int>> adj(num_nodes());
    for (int l = 0; l < num_lines(); ++l) {
      adj[line_from_[l]].push_back(line_to_[l]);
      adj[line_to_[l]].push_back(line_from_[l]);
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
    }
    if (count != num_nodes()) {
      std::string lonely;
      for (int i = 0; i < num_nodes(); ++i)
        if (!seen[i]) {
          lonely = nodes_[i].id;
          break;
        }
      throw ValidationError(ValidationError::Kind::Semantic, lonely,
                            "network is disconnected (node '" + lonely +
                                "' unreachable from '" + nodes_[0].id + "')");
    }
  }
}

int Network::node_index(const std::string& id) const {
  auto it = node_lookup_.find(id);
  return it == node_lookup_.end() ? -1 : it->second;
}

double Network::total_demand_mw() const {
  double total = 0.0;
  for (const auto& n : nodes_) total += n.demand_mw;
  return total;
}

Network Network::with_demands(std::vector<double> demand_mw) const {
  if (static_cast<int>(demand_mw.size()) != num_nodes())
    throw ValidationError(ValidationError::Kind::Semantic, "",
                          "demand override size mismatch");
  Network copy = *this;
  // Demand overrides are analysis inputs (perturbations may be negative);
  // input-file validation still applies its own policy.
  copy.options_.allow_negative_demand = true;
  for (int i = 0; i < num_nodes(); ++i) copy.nodes_[i].demand_mw = demand_mw[i];
  copy.index_and_validate();
  return copy;
}

Network Network::with_generator_limits(std::vector<double> p_min_mw,
                                       std::vector<double> p_max_mw) const {
  if (static_cast<int>(p_min_mw.size()) != num_generators() ||
      static_cast<int>(p_max_mw.size()) != num_generators())
    throw ValidationError(ValidationError::Kind::Semantic, "",
                          "generator limit override size mismatch");
  Network copy = *this;
  for (int g = 0; g < num_generators(); ++g) {
    copy.generators_[g].p_min_mw = p_min_mw[g];
    copy.generators_[g].p_max_mw = p_max_mw[g];
  }
  copy.index_and_validate();
  return copy;
}

Network Network::with_reference_node(const std::string& id) const {
  Network copy = *this;
  copy.reference_ = id;
  copy.index_and_validate();
  return copy;
}

bool Network::operator==(const Network& other) const {
  auto node_eq = [](const Node& a, const Node& b) {
    return a.id == b.id && a.demand_mw == b.demand_mw;
  };
  auto line_eq = [](const Line& a, const Line& b) {
    return a.id == b.id && a.from == b.from && a.to == b.to &&
           a.susceptance == b.susceptance && a.f_max_mw == b.f_max_mw;
  };
  auto gen_eq = [](const Generator& a, const Generator& b) {
    return a.id == b.id && a.node == b.node && a.cost_per_mwh == b.cost_per_mwh &&
           a.emission_rate == b.emission_rate && a.p_min_mw == b.p_min_mw &&
           a.p_max_mw == b.p_max_mw && a.type == b.type;
  };
  auto sto_eq = [](const StorageUnit& a, const StorageUnit& b) {
    return a.id == b.id && a.node == b.node && a.e_max_mwh == b.e_max_mwh &&
           a.efficiency == b.efficiency && a.power_cap_mw == b.power_cap_mw;
  };
  if (reference_ != other.reference_) return false;
  if (nodes_.size() != other.nodes_.size() || lines_.size() != other.lines_.size() ||
      generators_.size() != other.generators_.size() ||
      storages_.size() != other.storages_.size())
    return false;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (!node_eq(nodes_[i], other.nodes_[i])) return false;
  for (size_t i = 0; i < lines_.size(); ++i)
    if (!line_eq(lines_[i], other.lines_[i])) return false;
  for (size_t i = 0; i < generators_.size(); ++i)
    if (!gen_eq(generators_[i], other.generators_[i])) return false;
  for (size_t i = 0; i < storages_.size(); ++i)
    if (!sto_eq(storages_[i], other.storages_[i])) return false;
  return true;
}

Network apply_scenario_period(const Network& network, const Scenario& scenario,
                              int period) {
  if (period < 0 || period >= scenario.num_periods())
    throw ValidationError(ValidationError::Kind::Semantic, "",
                          "scenario period out of range");
  const auto& p = scenario.periods[period];
  std::vector<double> demand(network.num_nodes());
  for (int i = 0; i < network.num_nodes(); ++i) {
    const double scale = i < static_cast<int>(p.load_scale.size()) ? p.load_scale[i] : 1.0;
    demand[i] = scale * network.nodes()[i].demand_mw;
  }
  std::vector<double> pmin(network.num_generators()), pmax(network.num_generators());
  for (int g = 0; g < network.num_generators(); ++g) {
    const double cf =
        g < static_cast<int>(p.capacity_factor.size()) ? p.capacity_factor[g] : 1.0;
    pmax[g] = cf * network.generators()[g].p_max_mw;
    pmin[g] = std::min(network.generators()[g].p_min_mw, pmax[g]);
  }
  return network.with_demands(std::move(demand))
      .with_generator_limits(std::move(pmin), std::move(pmax));
}

}  // namespace lmegrid
