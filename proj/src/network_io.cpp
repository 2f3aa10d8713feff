#include "lmegrid/network_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lmegrid {

using nlohmann::ordered_json;
using Kind = ValidationError::Kind;

namespace {

double require_number(const ordered_json& obj, const char* key,
                      const std::string& entity) {
  if (!obj.contains(key))
    throw ValidationError(Kind::Schema, entity,
                          "'" + entity + "': missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw ValidationError(Kind::Schema, entity,
                          "'" + entity + "': field '" + key + "' must be a number");
  return v.get<double>();
}

std::string require_string(const ordered_json& obj, const char* key,
                           const std::string& entity) {
  if (!obj.contains(key))
    throw ValidationError(Kind::Schema, entity,
                          "'" + entity + "': missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_string())
    throw ValidationError(Kind::Schema, entity,
                          "'" + entity + "': field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string entity_id(const ordered_json& obj, const std::string& fallback) {
  if (obj.contains("id") && obj.at("id").is_string())
    return obj.at("id").get<std::string>();
  return fallback;
}

}  // namespace

Network load_network(const std::string& json_text, const LoadOptions& options) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(Kind::Schema, "", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ValidationError(Kind::Schema, "", "network document must be a JSON object");

  auto require_array = [&](const char* key) -> const ordered_json& {
    if (!doc.contains(key))
      throw ValidationError(Kind::Schema, key,
                            std::string("missing top-level field '") + key + "'");
    if (!doc.at(key).is_array())
      throw ValidationError(Kind::Schema, key,
                            std::string("field '") + key + "' must be an array");
    return doc.at(key);
  };

  std::vector<Node> nodes;
  for (const auto& j : require_array("nodes")) {
    const std::string id = entity_id(j, "<node>");
    nodes.push_back({require_string(j, "id", id), require_number(j, "demand", id)});
  }

  std::vector<Line> lines;
  for (const auto& j : require_array("lines")) {
    const std::string id = entity_id(j, "<line>");
    lines.push_back({require_string(j, "id", id), require_string(j, "from", id),
                     require_string(j, "to", id),
                     require_number(j, "susceptance", id),
                     require_number(j, "f_max", id)});
  }

  std::vector<Generator> generators;
  for (const auto& j : require_array("generators")) {
    const std::string id = entity_id(j, "<generator>");
    Generator g;
    g.id = require_string(j, "id", id);
    g.node = require_string(j, "node", id);
    g.cost_per_mwh = require_number(j, "cost", id);
    g.emission_rate = require_number(j, "emission_rate", id);
    g.p_min_mw = j.contains("p_min") ? require_number(j, "p_min", id) : 0.0;
    g.p_max_mw = require_number(j, "p_max", id);
    if (j.contains("type")) {
      const std::string t = require_string(j, "type", id);
      auto parsed = generator_type_from_string(t);
      if (!parsed)
        throw ValidationError(Kind::Schema, id,
                              "'" + id + "': unknown generator type '" + t + "'");
      g.type = *parsed;
    }
    generators.push_back(std::move(g));
  }

  std::vector<StorageUnit> storages;
  if (doc.contains("storages")) {
    for (const auto& j : require_array("storages")) {
      const std::string id = entity_id(j, "<storage>");
      StorageUnit s;
      s.id = require_string(j, "id", id);
      s.node = require_string(j, "node", id);
      s.e_max_mwh = require_number(j, "e_max", id);
      if (j.contains("efficiency")) {
        s.efficiency = require_number(j, "efficiency", id);
      } else if (options.default_storage_efficiency) {
        s.efficiency = *options.default_storage_efficiency;
      } else {
        throw ValidationError(Kind::Schema, id,
                              "'" + id + "': missing field 'efficiency'");
      }
      if (j.contains("power_cap")) s.power_cap_mw = require_number(j, "power_cap", id);
      storages.push_back(std::move(s));
    }
  }

  if (!doc.contains("reference_node") || !doc.at("reference_node").is_string())
    throw ValidationError(Kind::Schema, "reference_node",
                          "missing or non-string 'reference_node'");

  NetworkOptions nopt;
  nopt.allow_negative_demand = options.allow_negative_demand;
  return Network::create(std::move(nodes), std::move(lines), std::move(generators),
                         std::move(storages),
                         doc.at("reference_node").get<std::string>(), nopt);
}

Network load_network_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError(Kind::Schema, path, "cannot open network file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_network(buf.str(), options);
}

std::string emit_network(const Network& network) {
  ordered_json doc;
  doc["nodes"] = ordered_json::array();
  for (const auto& n : network.nodes())
    doc["nodes"].push_back({{"id", n.id}, {"demand", n.demand_mw}});
  doc["lines"] = ordered_json::array();
  for (const auto& l : network.lines())
    doc["lines"].push_back({{"id", l.id},
                            {"from", l.from},
                            {"to", l.to},
                            {"susceptance", l.susceptance},
                            {"f_max", l.f_max_mw}});
  doc["generators"] = ordered_json::array();
  for (const auto& g : network.generators()) {
    ordered_json j{{"id", g.id},         {"node", g.node},
                   {"cost", g.cost_per_mwh}, {"emission_rate", g.emission_rate},
                   {"p_min", g.p_min_mw},    {"p_max", g.p_max_mw}};
    if (g.type != GeneratorType::Other) j["type"] = to_string(g.type);
    doc["generators"].push_back(std::move(j));
  }
  doc["storages"] = ordered_json::array();
  for (const auto& s : network.storages()) {
    ordered_json j{{"id", s.id},
                   {"node", s.node},
                   {"e_max", s.e_max_mwh},
                   {"efficiency", s.efficiency}};
    if (s.power_cap_mw) j["power_cap"] = *s.power_cap_mw;
    doc["storages"].push_back(std::move(j));
  }
  doc["reference_node"] = network.reference_node();
  return doc.dump(2) + "\n";
}

void emit_network_file(const Network& network, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError(Kind::Schema, path, "cannot write network file '" + path + "'");
  out << emit_network(network);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
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

}  // namespace

Scenario load_scenario(const std::string& csv_text, const Network& network) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(Kind::Schema, "", "scenario CSV is empty");
  auto header = split_csv_line(line);
  const bool has_month = header.size() == 5 && header[4] == "month";
  if (!(header.size() == 4 || has_month) || header[0] != "period" ||
      header[1] != "entity_id" || header[2] != "kind" || header[3] != "value")
    throw ValidationError(Kind::Schema, "",
                          "scenario CSV header must be period,entity_id,kind,value");

  struct Entry {
    int period;
    std::string entity;
    std::string kind;
    double value;
    std::optional<int> month;
  };
  std::vector<Entry> entries;
  int max_period = -1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() < 4)
      throw ValidationError(Kind::Schema, "",
                            "scenario CSV line " + std::to_string(lineno) +
                                ": expected 4 columns");
    Entry e;
    try {
      e.period = std::stoi(f[0]);
      e.value = std::stod(f[3]);
    } catch (const std::exception&) {
      throw ValidationError(Kind::Schema, "",
                            "scenario CSV line " + std::to_string(lineno) +
                                ": non-numeric period or value");
    }
    e.entity = f[1];
    e.kind = f[2];
    if (has_month && f.size() >= 5 && !f[4].empty()) e.month = std::stoi(f[4]);
    if (e.period < 0)
      throw ValidationError(Kind::Schema, "", "scenario CSV: negative period index");
    if (e.kind != "load_scale" && e.kind != "capacity_factor")
      throw ValidationError(Kind::Schema, e.entity,
                            "scenario CSV line " + std::to_string(lineno) +
                                ": unknown kind '" + e.kind + "'");
    if (!std::isfinite(e.value) || e.value < 0)
      throw ValidationError(Kind::Semantic, e.entity,
                            "scenario CSV line " + std::to_string(lineno) +
                                ": value must be finite and nonnegative");
    max_period = std::max(max_period, e.period);
    entries.push_back(std::move(e));
  }
  if (max_period < 0)
    throw ValidationError(Kind::Schema, "", "scenario CSV has no data rows");

  std::unordered_map<std::string, int> gen_lookup;
  for (int g = 0; g < network.num_generators(); ++g)
    gen_lookup[network.generators()[g].id] = g;

  Scenario sc;
  sc.periods.resize(max_period + 1);
  for (auto& p : sc.periods) {
    p.load_scale.assign(network.num_nodes(), 1.0);
    p.capacity_factor.assign(network.num_generators(), 1.0);
  }
  for (const auto& e : entries) {
    auto& p = sc.periods[e.period];
    if (e.kind == "load_scale") {
      int i = network.node_index(e.entity);
      if (i < 0)
        throw ValidationError(Kind::Semantic, e.entity,
                              "scenario references unknown node '" + e.entity + "'");
      p.load_scale[i] = e.value;
    } else {
      auto it = gen_lookup.find(e.entity);
      if (it == gen_lookup.end())
        throw ValidationError(Kind::Semantic, e.entity,
                              "scenario references unknown generator '" + e.entity + "'");
      if (e.value > 1.0)
        throw ValidationError(Kind::Semantic, e.entity,
                              "capacity_factor for '" + e.entity + "' must be in [0,1]");
      p.capacity_factor[it->second] = e.value;
    }
    if (e.month) p.month = e.month;
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path, const Network& network) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError(Kind::Schema, path, "cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str(), network);
}

}  // namespace lmegrid
