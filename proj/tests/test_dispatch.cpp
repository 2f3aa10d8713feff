#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lmegrid/dispatch.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace lmegrid;
namespace tt = lmegrid::testing;

TEST_CASE("model shape: two-bus") {
  Network net = tt::fig_trans();
  DispatchLp model = build_dcopf(net);
  // |G| + |L| + |N| variables.
  CHECK(model.lp.num_variables() == 2 + 1 + 2);
  int balance = 0, flowlaw = 0;
  for (int r = 0; r < model.lp.num_rows(); ++r) {
    const auto& id = model.lp.row(r).id;
    balance += id.rfind("balance", 0) == 0;
    flowlaw += id.rfind("flowlaw", 0) == 0;
  }
  CHECK(balance == 2);
  CHECK(flowlaw == 1);
}

TEST_CASE("model shape: copper plate has no flow or angle structure") {
  Network net = tt::fig_copper(1.0);
  DispatchLp model = build_dcopf(net);
  CHECK(model.lp.num_variables() == 3 + 0 + 1);
  int balance = 0, flowlaw = 0;
  for (int r = 0; r < model.lp.num_rows(); ++r) {
    const auto& id = model.lp.row(r).id;
    balance += id.rfind("balance", 0) == 0;
    flowlaw += id.rfind("flowlaw", 0) == 0;
  }
  CHECK(balance == 1);
  CHECK(flowlaw == 0);
}

TEST_CASE("golden: transmission-constrained two-bus dispatch") {
  Network net = tt::fig_trans();
  DispatchResult r = solve_dcopf(net);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.generation_mw[0] == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(r.generation_mw[1] == doctest::Approx(150.0).epsilon(1e-9));
  CHECK(r.flow_mw[0] == doctest::Approx(100.0).epsilon(1e-9));
  // Both generators sit strictly inside their boxes, so LMPs equal costs.
  CHECK(r.lmp[0] == doctest::Approx(10.0));
  CHECK(r.lmp[1] == doctest::Approx(30.0));
  CHECK(r.lmp[1] > r.lmp[0]);
  // Congestion rent on the binding line, signs per the dual convention.
  CHECK(r.rho_plus[0] == doctest::Approx(-20.0));
  CHECK(r.rho_minus[0] == doctest::Approx(0.0));
  CHECK(r.total_cost == doctest::Approx(100 * 10.0 + 150 * 30.0));
  DispatchCheck check = check_dispatch(net, r);
  CHECK(check.max_residual() <= 1e-7);
}

TEST_CASE("golden: capacity-constrained two-bus dispatch") {
  Network net = tt::fig_gen();
  DispatchResult r = solve_dcopf(net);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.generation_mw[0] == doctest::Approx(200.0));
  CHECK(r.generation_mw[1] == doctest::Approx(50.0));
  // 50 MW toward bus 1: negative in the from->to orientation.
  CHECK(r.flow_mw[0] == doctest::Approx(-50.0));
  // Line is slack, so one uniform price set by the fossil unit.
  CHECK(r.lmp[0] == doctest::Approx(30.0));
  CHECK(r.lmp[1] == doctest::Approx(30.0));
  CHECK(r.gamma_plus[0] == doctest::Approx(10.0 - 30.0));
  CHECK(r.gamma_plus[1] == doctest::Approx(0.0));
  CHECK(check_dispatch(net, r).max_residual() <= 1e-7);
}

TEST_CASE("zero demand dispatches nothing") {
  Network net = tt::fig_trans().with_demands({0.0, 0.0});
  DispatchResult r = solve_dcopf(net);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.total_cost == doctest::Approx(0.0));
  for (double p : r.generation_mw) CHECK(p == doctest::Approx(0.0));
  for (double f : r.flow_mw) CHECK(f == doctest::Approx(0.0));
}

TEST_CASE("unservable demand reports infeasible") {
  Network net = tt::fig_trans().with_demands({0.0, 1000.0});
  CHECK(solve_dcopf(net).status == SolveStatus::Infeasible);
}

TEST_CASE("brute-force oracle agrees on a small 6-bus instance") {
  // Three generators with small boxes; one deliberately tight line.
  Network net = Network::create(
      {{"n1", 0.0}, {"n2", 12.0}, {"n3", 7.0}, {"n4", 0.0}, {"n5", 9.0}, {"n6", 4.0}},
      {{"a", "n1", "n2", 2.0, 40.0},
       {"b", "n2", "n3", 1.0, 25.0},
       {"c", "n3", "n4", 1.5, 40.0},
       {"d", "n4", "n5", 1.0, 40.0},
       {"e", "n5", "n6", 2.0, 40.0},
       {"f", "n6", "n1", 1.0, 8.0}},
      {{"g1", "n1", 5.0, 0.0, 0.0, 20.0},
       {"g2", "n3", 9.0, 1.0, 0.0, 25.0},
       {"g4", "n4", 14.0, 0.6, 0.0, 30.0}},
      {}, "n1");
  tt::BruteForceResult oracle = tt::brute_force_dispatch(net, 1.0);
  DispatchResult lp = solve_dcopf(net);
  REQUIRE(oracle.feasible);
  REQUIRE(lp.status == SolveStatus::Optimal);
  // Any lattice point is LP-feasible, so the LP can only be cheaper; the
  // 1 MW lattice can miss the vertex by at most a few unit swaps.
  CHECK(lp.total_cost <= oracle.best_cost + 1e-6);
  CHECK(oracle.best_cost - lp.total_cost <= 1.0 * (5.0 + 9.0 + 14.0));
}

TEST_CASE("brute-force oracle flags unservable instances") {
  Network net = tt::fig_copper(10.0);  // three 1 MW units vs 10 MW load
  CHECK_FALSE(tt::brute_force_dispatch(net, 0.25).feasible);
  CHECK(solve_dcopf(net).status == SolveStatus::Infeasible);
}

TEST_CASE("dispatch invariants hold on random networks") {
  for (std::uint64_t seed = 20; seed < 35; ++seed) {
    CAPTURE(seed);
    Network net = tt::random_network(seed);
    DispatchResult r = solve_dcopf(net);
    REQUIRE(r.status == SolveStatus::Optimal);
    DispatchCheck check = check_dispatch(net, r);
    CHECK(check.balance <= 1e-6);
    CHECK(check.flow_law <= 1e-6);
    CHECK(check.box <= 1e-6);
    CHECK(check.stationarity <= 1e-6);
    CHECK(check.duality_gap <= 1e-7);
    CHECK(check.complementary_slackness <= 1e-6);

    // Sign conventions.
    for (int l = 0; l < net.num_lines(); ++l) {
      CHECK(r.rho_plus[l] <= 1e-9);
      CHECK(r.rho_minus[l] >= -1e-9);
    }
    for (int g = 0; g < net.num_generators(); ++g) {
      CHECK(r.gamma_plus[g] <= 1e-9);
      CHECK(r.gamma_minus[g] >= -1e-9);
    }

    // Decentralized support: prices drive strictly-priced units to bounds.
    for (int g = 0; g < net.num_generators(); ++g) {
      const auto& gen = net.generators()[g];
      const double pi = r.lmp[net.generator_node(g)];
      if (gen.cost_per_mwh > pi + 1e-7)
        CHECK(r.generation_mw[g] == doctest::Approx(gen.p_min_mw).epsilon(1e-6));
      if (gen.cost_per_mwh < pi - 1e-7)
        CHECK(r.generation_mw[g] == doctest::Approx(gen.p_max_mw).epsilon(1e-6));
    }
  }
}
