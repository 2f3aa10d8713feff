#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lmegrid/accounting.hpp"
#include "lmegrid/verify.hpp"
#include "support/fixtures.hpp"

using namespace lmegrid;
namespace tt = lmegrid::testing;

TEST_CASE("fd_lme golden: transmission-constrained example") {
  Network net = tt::fig_trans();
  DirectionalSlope s1 = fd_lme(net, 0);
  REQUIRE(s1.left_status == SlopeStatus::Ok);
  REQUIRE(s1.right_status == SlopeStatus::Ok);
  CHECK(s1.smooth);
  CHECK(s1.left_slope == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(s1.right_slope == doctest::Approx(0.0).epsilon(1e-7));

  DirectionalSlope s2 = fd_lme(net, 1);
  CHECK(s2.smooth);
  CHECK(s2.left_slope == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s2.right_slope == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("fd_lme detects the copper-plate kink at demand 2") {
  Network net = tt::fig_copper(2.0);
  FdOptions opt;
  opt.epsilon = 1e-3;
  DirectionalSlope s = fd_lme(net, 0, opt);
  REQUIRE(s.left_status == SlopeStatus::Ok);
  REQUIRE(s.right_status == SlopeStatus::Ok);
  CHECK(s.left_slope == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.right_slope == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_FALSE(s.smooth);
}

TEST_CASE("fd_lme flags a kink strictly inside the step as a piece boundary") {
  // The kink at demand 2 sits between eps/2 and eps on the right side, so
  // the two step sizes disagree.
  Network net = tt::fig_copper(2.0 - 7.5e-4);
  FdOptions opt;
  opt.epsilon = 1e-3;
  DirectionalSlope s = fd_lme(net, 0, opt);
  CHECK(s.right_status == SlopeStatus::PieceBoundary);
  CHECK(s.left_status == SlopeStatus::Ok);
  CHECK_FALSE(s.smooth);
}

TEST_CASE("fd_lme reports infeasible directions at the domain boundary") {
  // All units fully loaded: one more MW is unservable.
  Network net = tt::fig_copper(3.0);
  DirectionalSlope s = fd_lme(net, 0);
  CHECK(s.right_status == SlopeStatus::Infeasible);
  CHECK(s.left_status == SlopeStatus::Ok);
  CHECK_FALSE(s.smooth);
}

TEST_CASE("smooth fd slopes match the combined-model LME on random fixtures") {
  int smooth_checked = 0;
  for (std::uint64_t seed = 800; seed < 812; ++seed) {
    CAPTURE(seed);
    Network net = tt::random_network(seed);
    CombinedResult r = solve_combined(net);
    NodalLme lmes = lme(r, net);
    for (int n = 0; n < net.num_nodes(); ++n) {
      DirectionalSlope s = fd_lme(net, n);
      if (!s.smooth) continue;
      ++smooth_checked;
      const double slope = 0.5 * (s.left_slope + s.right_slope);
      CHECK(std::abs(lmes.value[n] - slope) <= 1e-5 * (1.0 + std::abs(slope)));
    }
  }
  CHECK(smooth_checked > 20);
}

TEST_CASE("ptdf golden values") {
  Network net = tt::fig_trans();
  DispatchResult d = solve_dcopf(net);
  PtdfResult p2 = ptdf_lme(net, d, 1);
  REQUIRE(p2.accepted());
  CHECK(p2.value == doctest::Approx(1.0).epsilon(1e-9));
  PtdfResult p1 = ptdf_lme(net, d, 0);
  REQUIRE(p1.accepted());
  CHECK(p1.value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("ptdf on the copper plate reduces to the marginal unit's rate") {
  Network net = tt::fig_copper(1.5);
  DispatchResult d = solve_dcopf(net);
  PtdfResult p = ptdf_lme(net, d, 0);
  REQUIRE(p.accepted());
  CHECK(p.value == doctest::Approx(2.0).epsilon(1e-9));  // coal on the margin
}

TEST_CASE("ptdf refuses degenerate instances with a diagnosis") {
  // Exact twins at one node: marginal count breaks the square condition.
  Network net = Network::create(
      {{"a", 150.0}, {"b", 0.0}},
      {{"l", "a", "b", 1.0, 200.0}},
      {{"g1", "a", 20.0, 0.4, 0.0, 100.0},
       {"g2", "a", 20.0, 0.4, 0.0, 100.0},
       {"g3", "b", 45.0, 1.1, 0.0, 90.0}},
      {}, "a");
  DispatchResult d = solve_dcopf(net);
  PtdfResult p = ptdf_lme(net, d, 0);
  CHECK_FALSE(p.accepted());
  CHECK_FALSE(p.diagnosis.empty());
}

TEST_CASE("ptdf agrees with the combined LME wherever it accepts") {
  int accepted = 0;
  for (std::uint64_t seed = 900; seed < 915; ++seed) {
    CAPTURE(seed);
    tt::RandomNetworkOptions opt;
    opt.min_nodes = 5;
    opt.max_nodes = 5;
    Network net = tt::random_network(seed, opt);
    DispatchResult d = solve_dcopf(net);
    CombinedResult r = solve_combined(net);
    NodalLme lmes = lme(r, net);
    for (int n = 0; n < net.num_nodes(); ++n) {
      PtdfResult p = ptdf_lme(net, d, n);
      if (!p.accepted()) continue;
      ++accepted;
      CHECK(std::abs(p.value - lmes.value[n]) <=
            1e-6 * (1.0 + std::abs(lmes.value[n])));
    }
  }
  CHECK(accepted > 10);
}

TEST_CASE("sweep golden: copper-plate segments and breakpoints") {
  Network net = tt::fig_copper(0.0);
  SweepCurve curve = sweep_emissions(net, 0, 0.0, 3.0, 61);
  REQUIRE(curve.segment_slopes.size() == 3);
  CHECK(curve.segment_slopes[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(curve.segment_slopes[1] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(curve.segment_slopes[2] == doctest::Approx(0.5).epsilon(1e-8));
  REQUIRE(curve.breakpoints.size() == 2);
  CHECK(std::abs(curve.breakpoints[0] - 1.0) <= 1e-6);
  CHECK(std::abs(curve.breakpoints[1] - 2.0) <= 1e-6);

  // Off-grid sampling still recovers the kinks through line intersection.
  SweepCurve odd = sweep_emissions(net, 0, 0.05, 2.95, 48);
  REQUIRE(odd.breakpoints.size() == 2);
  CHECK(std::abs(odd.breakpoints[0] - 1.0) <= 1e-6);
  CHECK(std::abs(odd.breakpoints[1] - 2.0) <= 1e-6);
}

TEST_CASE("sweep: constant-rate fleet is one segment") {
  Network net = Network::create(
      {{"hub", 50.0}}, {},
      {{"g1", "hub", 10.0, 0.7, 0.0, 100.0}, {"g2", "hub", 20.0, 0.7, 0.0, 100.0}},
      {}, "hub");
  SweepCurve curve = sweep_emissions(net, 0, -40.0, 40.0, 33);
  REQUIRE(curve.segment_slopes.size() == 1);
  CHECK(curve.segment_slopes[0] == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(curve.breakpoints.empty());
}

TEST_CASE("sweep truncates infeasible ends and reports them") {
  Network net = tt::fig_copper(1.0);
  SweepCurve curve = sweep_emissions(net, 0, -2.0, 3.0, 26);
  CHECK(curve.truncated_low > 0);   // negative total demand is unservable
  CHECK(curve.truncated_high > 0);  // beyond 3 MW exceeds the fleet
  CHECK(curve.alpha.front() >= -1.0 - 1e-9);
  CHECK(curve.alpha.back() <= 2.0 + 1e-9);
}

TEST_CASE("sweep continuity on random fixtures") {
  for (std::uint64_t seed = 1000; seed < 1006; ++seed) {
    CAPTURE(seed);
    tt::RandomNetworkOptions opt;
    opt.min_nodes = 4;
    opt.max_nodes = 4;
    Network net = tt::random_network(seed, opt);
    int node = 0;
    for (int n = 0; n < net.num_nodes(); ++n)
      if (net.nodes()[n].demand_mw > net.nodes()[node].demand_mw) node = n;
    const double span = 0.3 * std::max(20.0, net.nodes()[node].demand_mw);
    SweepCurve curve = sweep_emissions(net, node, -span, span, 200);
    REQUIRE(curve.alpha.size() >= 2);
    double max_slope = 1.0;
    for (double s : curve.segment_slopes) max_slope = std::max(max_slope, std::abs(s));
    const double step = curve.alpha[1] - curve.alpha[0];
    CHECK(curve.max_adjacent_jump <= 4.0 * max_slope * step + 1e-6);
    // Slope changes only at finitely many recovered breakpoints.
    CHECK(curve.breakpoints.size() <= 24);
  }
}

TEST_CASE("generator equilibrium: transmission-constrained example is clean") {
  Network net = tt::fig_trans();
  CombinedResult r = solve_combined(net);
  GenEquilibriumReport report = check_generator_equilibrium(net, r);
  CHECK(report.clean());
  // gen1 is double-tied (c = LMP and sigma = LME): its central dispatch of
  // 100 MW sits inside the best-response interval.
  CHECK(report.tied_generators >= 1);
}

TEST_CASE("generator equilibrium: strictly-priced units sit at their forced bound") {
  Network net = tt::fig_gen();
  CombinedResult r = solve_combined(net);
  NodalLme lmes = lme(r, net);
  const auto& g1 = net.generators()[0];
  const double lmp1 = r.pi[net.generator_node(0)];
  REQUIRE(g1.cost_per_mwh < lmp1 - 1e-6);  // strictly priced below the LMP
  CHECK(r.generation_mw[0] == doctest::Approx(g1.p_max_mw).epsilon(1e-9));
  GenEquilibriumReport report = check_generator_equilibrium(net, r);
  CHECK(report.clean());
  (void)lmes;
}

TEST_CASE("generator equilibrium: duplicated units enumerate emission-equal selections") {
  for (std::uint64_t seed = 1100; seed < 1110; ++seed) {
    CAPTURE(seed);
    tt::RandomNetworkOptions opt;
    opt.duplicate_generators = true;
    opt.min_nodes = 3;
    opt.max_nodes = 6;
    Network net = tt::random_network(seed, opt);
    CombinedResult r = solve_combined(net);
    GenEquilibriumReport report = check_generator_equilibrium(net, r);
    CAPTURE(report.violations.empty() ? "" : report.violations[0].generator);
    CHECK(report.clean());
  }
}

TEST_CASE("fault injection: a corrupted dual breaks the footprint identity") {
  Network net = tt::fig_trans();
  CombinedResult r = solve_combined(net);
  REQUIRE(footprint_residual(net, r) <= 1e-9);
  CombinedResult corrupted = r;
  corrupted.p_pi[0] += 0.5;
  CHECK(footprint_residual(net, corrupted) > 1e-6);
}

TEST_CASE("induced flows: balanced vectors resolve, unbalanced are rejected") {
  Network net = tt::fig_trans();
  auto ok = induce_flows(net, {100.0, 150.0});
  REQUIRE(ok.has_value());
  CHECK(ok->flow_mw[0] == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(ok->within_limits);
  auto over = induce_flows(net, {150.0, 100.0});
  REQUIRE(over.has_value());
  CHECK_FALSE(over->within_limits);  // 150 MW through a 100 MW line
  CHECK_FALSE(induce_flows(net, {100.0, 100.0}).has_value());
}
