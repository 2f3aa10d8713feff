#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmegrid/network_io.hpp"
#include "support/fixtures.hpp"

using namespace lmegrid;
namespace tt = lmegrid::testing;

namespace {

const char* kTwoBusJson = R"({
  "nodes": [{"id": "bus1", "demand": 0}, {"id": "bus2", "demand": 250}],
  "lines": [{"id": "line1", "from": "bus1", "to": "bus2", "susceptance": 1.0, "f_max": 100}],
  "generators": [
    {"id": "gen1", "node": "bus1", "cost": 10, "emission_rate": 0, "p_min": 0, "p_max": 200, "type": "wind"},
    {"id": "gen2", "node": "bus2", "cost": 30, "emission_rate": 1, "p_min": 0, "p_max": 200, "type": "gas"}
  ],
  "storages": [],
  "reference_node": "bus1"
})";

}  // namespace

TEST_CASE("two-bus file loads with the expected shape") {
  Network net = load_network(kTwoBusJson);
  CHECK(net.num_nodes() == 2);
  CHECK(net.num_lines() == 1);
  CHECK(net.num_generators() == 2);
  CHECK(net.lines()[0].f_max_mw == 100.0);
  CHECK(net.reference_node() == "bus1");
  CHECK(net == tt::fig_trans());
}

TEST_CASE("schema violations carry the entity id") {
  SUBCASE("missing field") {
    const char* doc = R"({"nodes":[{"id":"a"}],"lines":[],"generators":[],"reference_node":"a"})";
    try {
      load_network(doc);
      FAIL("expected schema error");
    } catch (const ValidationError& e) {
      CHECK(e.kind() == ValidationError::Kind::Schema);
      CHECK(e.entity() == "a");
    }
  }
  SUBCASE("wrong type") {
    const char* doc =
        R"({"nodes":[{"id":"a","demand":"lots"}],"lines":[],"generators":[],"reference_node":"a"})";
    CHECK_THROWS_AS(load_network(doc), ValidationError);
  }
  SUBCASE("invalid json") { CHECK_THROWS_AS(load_network("{nope"), ValidationError); }
}

TEST_CASE("semantic violations: self-loop, dangling ids, disconnection") {
  SUBCASE("line from == to") {
    const char* doc = R"({
      "nodes":[{"id":"a","demand":0},{"id":"b","demand":0}],
      "lines":[{"id":"l","from":"a","to":"a","susceptance":1,"f_max":10}],
      "generators":[],"reference_node":"a"})";
    try {
      load_network(doc);
      FAIL("expected semantic error");
    } catch (const ValidationError& e) {
      CHECK(e.kind() == ValidationError::Kind::Semantic);
      CHECK(e.entity() == "l");
    }
  }
  SUBCASE("generator at unknown node") {
    const char* doc = R"({
      "nodes":[{"id":"a","demand":0}],
      "lines":[],
      "generators":[{"id":"g","node":"ghost","cost":1,"emission_rate":0,"p_max":10}],
      "reference_node":"a"})";
    try {
      load_network(doc);
      FAIL("expected semantic error");
    } catch (const ValidationError& e) {
      CHECK(e.entity() == "g");
    }
  }
  SUBCASE("disconnected graph rejected") {
    const char* doc = R"({
      "nodes":[{"id":"a","demand":0},{"id":"b","demand":0}],
      "lines":[],
      "generators":[],"reference_node":"a"})";
    try {
      load_network(doc);
      FAIL("expected semantic error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("disconnected") != std::string::npos);
    }
  }
  SUBCASE("p_min > p_max") {
    const char* doc = R"({
      "nodes":[{"id":"a","demand":0}],
      "lines":[],
      "generators":[{"id":"g","node":"a","cost":1,"emission_rate":0,"p_min":20,"p_max":10}],
      "reference_node":"a"})";
    CHECK_THROWS_AS(load_network(doc), ValidationError);
  }
  SUBCASE("unknown reference node") {
    const char* doc =
        R"({"nodes":[{"id":"a","demand":0}],"lines":[],"generators":[],"reference_node":"zz"})";
    CHECK_THROWS_AS(load_network(doc), ValidationError);
  }
}

TEST_CASE("negative demand is rejected by default and allowed under the flag") {
  const char* doc =
      R"({"nodes":[{"id":"a","demand":-5}],"lines":[],"generators":[],"reference_node":"a"})";
  CHECK_THROWS_AS(load_network(doc), ValidationError);
  LoadOptions opt;
  opt.allow_negative_demand = true;
  Network net = load_network(doc, opt);
  CHECK(net.nodes()[0].demand_mw == -5.0);
}

TEST_CASE("p_min defaults to zero when omitted") {
  const char* doc = R"({
    "nodes":[{"id":"a","demand":1}],
    "lines":[],
    "generators":[{"id":"g","node":"a","cost":1,"emission_rate":0,"p_max":10}],
    "reference_node":"a"})";
  CHECK(load_network(doc).generators()[0].p_min_mw == 0.0);
}

TEST_CASE("storage efficiency falls back to the configured default") {
  const char* doc = R"({
    "nodes":[{"id":"a","demand":1}],
    "lines":[],
    "generators":[{"id":"g","node":"a","cost":1,"emission_rate":0,"p_max":10}],
    "storages":[{"id":"s","node":"a","e_max":50}],
    "reference_node":"a"})";
  CHECK_THROWS_AS(load_network(doc), ValidationError);  // no default configured
  LoadOptions opt;
  opt.default_storage_efficiency = 0.81;
  CHECK(load_network(doc, opt).storages()[0].efficiency == 0.81);
}

TEST_CASE("round-trip: load(emit(network)) equals the network field-for-field") {
  for (const Network& net :
       {tt::fig_trans(), tt::fig_gen(), tt::ring3(), tt::fig_stor_network(true),
        tt::random_network(11), tt::random_network(12)}) {
    Network back = load_network(emit_network(net));
    CHECK(back == net);
  }
}

TEST_CASE("scenario: identity scaling leaves the network unchanged") {
  Network net = tt::fig_trans();
  Scenario sc;
  sc.periods.resize(1);
  sc.periods[0].load_scale.assign(net.num_nodes(), 1.0);
  sc.periods[0].capacity_factor.assign(net.num_generators(), 1.0);
  CHECK(apply_scenario_period(net, sc, 0) == net);
}

TEST_CASE("scenario: zero capacity factor zeroes the unit") {
  Network net = tt::fig_trans();
  Scenario sc;
  sc.periods.resize(1);
  sc.periods[0].capacity_factor.assign(net.num_generators(), 1.0);
  sc.periods[0].capacity_factor[0] = 0.0;
  Network scaled = apply_scenario_period(net, sc, 0);
  CHECK(scaled.generators()[0].p_max_mw == 0.0);
  CHECK(scaled.generators()[0].p_min_mw == 0.0);  // clamped
}

TEST_CASE("scenario: random scaling matches direct summation and keeps invariants") {
  tt::Rng rng(99);
  Network net = tt::random_network(5);
  Scenario sc;
  sc.periods.resize(3);
  for (auto& p : sc.periods) {
    for (int n = 0; n < net.num_nodes(); ++n) p.load_scale.push_back(rng.uniform(0.0, 2.0));
    for (int g = 0; g < net.num_generators(); ++g)
      p.capacity_factor.push_back(rng.uniform(0.0, 1.0));
  }
  for (int t = 0; t < 3; ++t) {
    Network scaled = apply_scenario_period(net, sc, t);
    double expect = 0.0;
    for (int n = 0; n < net.num_nodes(); ++n)
      expect += sc.periods[t].load_scale[n] * net.nodes()[n].demand_mw;
    CHECK(scaled.total_demand_mw() == doctest::Approx(expect).epsilon(1e-12));
    for (int g = 0; g < net.num_generators(); ++g) {
      CHECK(scaled.generators()[g].p_min_mw <= scaled.generators()[g].p_max_mw);
    }
    for (const auto& line : scaled.lines()) CHECK(line.f_max_mw > 0);
  }
}

TEST_CASE("scenario CSV parsing") {
  Network net = tt::fig_trans();
  const std::string csv =
      "period,entity_id,kind,value\n"
      "0,bus2,load_scale,0.5\n"
      "1,gen1,capacity_factor,0.25\n";
  Scenario sc = load_scenario(csv, net);
  REQUIRE(sc.num_periods() == 2);
  CHECK(sc.periods[0].load_scale[1] == 0.5);
  CHECK(sc.periods[0].capacity_factor[0] == 1.0);
  CHECK(sc.periods[1].capacity_factor[0] == 0.25);

  CHECK_THROWS_AS(load_scenario("bogus header\n1,2,3,4\n", net), ValidationError);
  CHECK_THROWS_AS(
      load_scenario("period,entity_id,kind,value\n0,ghost,load_scale,1\n", net),
      ValidationError);
  CHECK_THROWS_AS(
      load_scenario("period,entity_id,kind,value\n0,gen1,capacity_factor,1.5\n", net),
      ValidationError);
}

TEST_CASE("3-bus ring fixture emits then reloads connected") {
  Network net = tt::ring3();
  Network back = load_network(emit_network(net));
  CHECK(back.num_lines() == 3);
  CHECK(back == net);
}
