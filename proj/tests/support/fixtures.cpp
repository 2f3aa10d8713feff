#include "support/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "lmegrid/dispatch.hpp"

namespace lmegrid::testing {

std::uint64_t Rng::next() {
  // splitmix64: identical sequences on every platform.
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

int Rng::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
}

Network fig_trans() {
  return Network::create(
      {{"bus1", 0.0}, {"bus2", 250.0}},
      {{"line1", "bus1", "bus2", 1.0, 100.0}},
      {{"gen1", "bus1", 10.0, 0.0, 0.0, 200.0, GeneratorType::Wind},
       {"gen2", "bus2", 30.0, 1.0, 0.0, 200.0, GeneratorType::Gas}},
      {}, "bus1");
}

Network fig_gen() {
  return Network::create(
      {{"bus1", 250.0}, {"bus2", 0.0}},
      {{"line1", "bus1", "bus2", 1.0, 100.0}},
      {{"gen1", "bus1", 10.0, 0.0, 0.0, 200.0, GeneratorType::Wind},
       {"gen2", "bus2", 30.0, 1.0, 0.0, 200.0, GeneratorType::Gas}},
      {}, "bus1");
}

Network fig_copper(double demand) {
  return Network::create(
      {{"hub", demand}}, {},
      {{"renewable", "hub", 1.0, 0.0, 0.0, 1.0, GeneratorType::Wind},
       {"coal", "hub", 2.0, 2.0, 0.0, 1.0, GeneratorType::Coal},
       {"gas", "hub", 3.0, 0.5, 0.0, 1.0, GeneratorType::Gas}},
      {}, "hub");
}

Network fig_stor_network(bool with_storage) {
  std::vector<StorageUnit> storages;
  if (with_storage) storages.push_back({"stor1", "bus1", 1000.0, 1.0, std::nullopt});
  return Network::create(
      {{"bus1", 50.0}, {"bus2", 150.0}},
      {{"line1", "bus1", "bus2", 1.0, 100.0}},
      {{"gen1", "bus1", 10.0, 0.0, 0.0, 200.0, GeneratorType::Wind},
       {"gen2", "bus2", 30.0, 1.0, 0.0, 300.0, GeneratorType::Gas}},
      std::move(storages), "bus1");
}

Horizon fig_stor_horizon(const Network& network) {
  Horizon h;
  h.demand_mw = {{50.0, 150.0}, {50.0, 150.0}};
  // Renewable available in period 1 only.
  h.capacity_factor.assign(2, std::vector<double>(network.num_generators(), 1.0));
  h.capacity_factor[1][0] = 0.0;
  h.initial_soc_mwh.assign(network.num_storages(), 0.0);
  return h;
}

Network ring3() {
  return Network::create(
      {{"n1", 0.0}, {"n2", 100.0}, {"n3", 50.0}},
      {{"l12", "n1", "n2", 2.0, 100.0},
       {"l23", "n2", "n3", 1.0, 50.0},
       {"l31", "n3", "n1", 1.0, 30.0}},
      {{"g1", "n1", 12.0, 0.1, 0.0, 180.0, GeneratorType::Nuclear},
       {"g3", "n3", 25.0, 0.8, 0.0, 120.0, GeneratorType::Gas}},
      {}, "n1");
}

namespace {

Network assemble_random(std::uint64_t seed, const RandomNetworkOptions& opt,
                        double demand_scale, double cap_scale) {
  Rng rng(seed * 0x9e3779b97f4a7c15ull + 1);
  const int N = rng.uniform_int(opt.min_nodes, opt.max_nodes);

  std::vector<Node> nodes;
  double total_demand = 0.0;
  for (int i = 0; i < N; ++i) {
    double d = rng.uniform(0.0, 300.0);
    if (rng.uniform(0.0, 1.0) < 0.3) d = 0.0;
    d *= demand_scale;
    total_demand += d;
    nodes.push_back({"n" + std::to_string(i + 1), d});
  }
  if (total_demand < 1.0) {
    nodes[0].demand_mw += 50.0 * demand_scale;
    total_demand += 50.0 * demand_scale;
  }

  std::vector<Line> lines;
  int line_id = 0;
  auto add_line = [&](int u, int v, double cap) {
    lines.push_back({"l" + std::to_string(++line_id), nodes[u].id, nodes[v].id,
                     rng.uniform(1.0, 10.0), cap * cap_scale});
  };
  // Spanning tree with generous caps keeps every instance servable; chords
  // get tight caps to induce congestion.
  for (int i = 1; i < N; ++i)
    add_line(rng.uniform_int(0, i - 1), i, rng.uniform(0.7, 1.2) * total_demand + 50.0);
  const int chords = rng.uniform_int(0, N - 1);
  for (int c = 0; c < chords; ++c) {
    const int u = rng.uniform_int(0, N - 1);
    const int v = rng.uniform_int(0, N - 1);
    if (u == v) continue;
    add_line(u, v, rng.uniform(10.0, 120.0));
  }

  const int G = rng.uniform_int(opt.min_generators, opt.max_generators);
  std::vector<Generator> gens;
  double total_cap = 0.0;
  for (int g = 0; g < G; ++g) {
    Generator gen;
    gen.id = "g" + std::to_string(g + 1);
    gen.node = nodes[rng.uniform_int(0, N - 1)].id;
    gen.cost_per_mwh = rng.uniform(5.0, 100.0);
    if (rng.uniform(0.0, 1.0) < 0.35) {
      gen.emission_rate = 0.0;
      gen.type = rng.uniform(0.0, 1.0) < 0.5 ? GeneratorType::Wind : GeneratorType::Solar;
    } else {
      gen.emission_rate = rng.uniform(0.2, 1.2);
      gen.type = gen.emission_rate > 0.8 ? GeneratorType::Coal : GeneratorType::Gas;
    }
    gen.p_min_mw = 0.0;
    gen.p_max_mw = rng.uniform(20.0, 250.0);
    total_cap += gen.p_max_mw;
    gens.push_back(std::move(gen));
  }
  if (total_cap < 1.4 * total_demand) {
    const double boost = 1.4 * total_demand / total_cap;
    for (auto& g : gens) g.p_max_mw *= boost;
  }
  if (opt.duplicate_generators) {
    const int clones = rng.uniform_int(1, 2);
    for (int c = 0; c < clones && c < static_cast<int>(gens.size()); ++c) {
      Generator dup = gens[rng.uniform_int(0, static_cast<int>(gens.size()) - 1)];
      dup.id += "_dup" + std::to_string(c + 1);
      gens.push_back(std::move(dup));
    }
  }

  std::vector<StorageUnit> storages;
  if (opt.with_storage) {
    const int S = rng.uniform_int(1, 2);
    const double etas[3] = {1.0, 0.9, 0.81};
    for (int s = 0; s < S; ++s)
      storages.push_back({"s" + std::to_string(s + 1),
                          nodes[rng.uniform_int(0, N - 1)].id,
                          rng.uniform(50.0, 400.0), etas[rng.uniform_int(0, 2)],
                          std::nullopt});
  }

  return Network::create(std::move(nodes), std::move(lines), std::move(gens),
                         std::move(storages), "n1");
}

}  // namespace

Network random_network(std::uint64_t seed, const RandomNetworkOptions& opt) {
  double demand_scale = 1.0;
  double cap_scale = 1.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Network net = assemble_random(seed, opt, demand_scale, cap_scale);
    DispatchResult probe = solve_dcopf(net);
    if (probe.status == SolveStatus::Optimal) return net;
    if (attempt % 2 == 0)
      cap_scale *= 2.0;
    else
      demand_scale *= 0.7;
  }
  throw std::runtime_error("random_network: could not make seed " +
                           std::to_string(seed) + " feasible");
}

Horizon random_horizon(const Network& network, int periods, std::uint64_t seed) {
  Rng rng(seed * 0x517cc1b727220a95ull + 3);
  Horizon h;
  h.demand_mw.assign(periods, std::vector<double>(network.num_nodes(), 0.0));
  h.capacity_factor.assign(periods,
                           std::vector<double>(network.num_generators(), 1.0));
  for (int t = 0; t < periods; ++t) {
    for (int n = 0; n < network.num_nodes(); ++n)
      h.demand_mw[t][n] = network.nodes()[n].demand_mw * rng.uniform(0.6, 1.3);
    for (int g = 0; g < network.num_generators(); ++g)
      if (network.generators()[g].emission_rate == 0.0)
        h.capacity_factor[t][g] = rng.uniform(0.0, 1.0);
  }
  h.initial_soc_mwh.assign(network.num_storages(), 0.0);
  return h;
}

DiurnalFixture solar_diurnal_fixture() {
  DiurnalFixture fx{
      Network::create(
          {{"sun", 0.0}, {"city", 200.0}},
          {{"tie", "sun", "city", 1.0, 300.0}},
          {{"solar1", "sun", 0.0, 0.0, 0.0, 500.0, GeneratorType::Solar},
           {"gas1", "city", 40.0, 0.9, 0.0, 500.0, GeneratorType::Gas}},
          {}, "sun"),
      ""};
  std::string csv = "period,entity_id,kind,value\n";
  char buf[96];
  for (int t = 0; t < 48; ++t) {
    const int hour = t % 24;
    const double cf = std::max(0.0, std::sin(M_PI * (hour - 6) / 12.0));
    std::snprintf(buf, sizeof buf, "%d,solar1,capacity_factor,%.10g\n", t, cf);
    csv += buf;
  }
  fx.scenario_csv = csv;
  return fx;
}

}  // namespace lmegrid::testing
