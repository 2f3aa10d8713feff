// Shared test fixtures: the worked two-bus examples, the copper-plate
// three-generator instance, storage horizons, and seeded random networks.
#pragma once

#include <cstdint>
#include <vector>

#include "lmegrid/multiperiod.hpp"
#include "lmegrid/network.hpp"

namespace lmegrid::testing {

// Two-bus, line 1->2 capped at 100 MW, 250 MW load at bus 2. Renewable
// (sigma 0) at bus 1, fossil (sigma 1) at bus 2, both 200 MW. Transmission
// limits the renewable: dispatch (100, 150), flow 100.
Network fig_trans();

// Two-bus, 250 MW load at bus 1. Renewable at bus 1 fully dispatched at its
// 200 MW cap, fossil at bus 2 sends 50 MW over the 100 MW line.
Network fig_gen();

// Single-node copper plate with three 1 MW units: renewable (cost 1,
// sigma 0), coal (cost 2, sigma 2), gas (cost 3, sigma 0.5). Emissions as a
// function of demand has slopes (0, 2, 0.5) with kinks at 1 and 2.
Network fig_copper(double demand = 0.0);

// Two-bus two-period storage example: loads (50, 150) in both periods,
// renewable at bus 1 (200 MW period 1, 0 period 2), fossil 300 MW at bus 2,
// unlimited-energy storage at bus 1 with eta = 1.
Network fig_stor_network(bool with_storage);
Horizon fig_stor_horizon(const Network& network);

// Three-bus ring.
Network ring3();

// Deterministic, connected random network: 3-12 buses, 2-20 generators,
// random congestion; always solvable. duplicate_generators forces exact-tie
// degeneracy by cloning a few units.
struct RandomNetworkOptions {
  int min_nodes = 3, max_nodes = 12;
  int min_generators = 2, max_generators = 20;
  bool duplicate_generators = false;
  bool with_storage = false;
};
Network random_network(std::uint64_t seed, const RandomNetworkOptions& options = {});

// Random horizon for a storage network: T periods of demand wobble plus
// renewable capacity-factor swings.
Horizon random_horizon(const Network& network, int periods, std::uint64_t seed);

// 48-period two-day scenario whose solar capacity factor peaks midday;
// written against the returned network (solar at bus 1, fossil + load at
// bus 2). Midday LMEs at the load node drop to the solar margin.
struct DiurnalFixture {
  Network network;
  std::string scenario_csv;
};
DiurnalFixture solar_diurnal_fixture();

// Portable deterministic RNG helpers (splitmix64 core).
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive
};

}  // namespace lmegrid::testing
