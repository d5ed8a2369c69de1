#include "doctest.h"

#include "iotsim/topology.hpp"

#include <algorithm>
#include <set>

using namespace iotsim;

namespace {

// Every non-sink node's rank is one more than its parent's, and following
// parents always reaches the sink.
bool
consistent(const TreeState& tree, NodeId sink)
{
  for (NodeId v = 0; v < static_cast<NodeId>(tree.size()); ++v) {
    if (v == sink) {
      if (tree.rank(v) != 0) {
        return false;
      }
      continue;
    }
    if (tree.rank(v) != tree.rank(tree.parent(v)) + 1) {
      return false;
    }
    NodeId hop = v;
    for (std::size_t steps = 0; hop != sink; ++steps) {
      if (steps > tree.size()) {
        return false;
      }
      hop = tree.parent(hop);
    }
  }
  return true;
}

} // namespace

TEST_CASE("chain layout")
{
  Topology t = buildChain(5, 0.8);
  CHECK(t.size() == 6);
  CHECK(t.links.size() == 5);
  CHECK(shortestHops(t, 5, 0) == 5);
  CHECK(t.producers().size() == 5);
  TreeState tree(t);
  CHECK(tree.maxRank() == 5);
  CHECK(tree.parent(3) == 2);
  CHECK(consistent(tree, 0));
  CHECK_THROWS(buildChain(0, 0.5));
  CHECK_THROWS(buildChain(2, 1.5));
}

TEST_CASE("single hop is a one-link chain")
{
  Topology t = buildSingleHop(0.99);
  CHECK(t.size() == 2);
  CHECK(t.links.front().p == doctest::Approx(0.99));
}

TEST_CASE("random trees satisfy the construction contract")
{
  TreeSpec spec;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomStreams streams(seed);
    auto [topo, tree] = buildTree(spec, streams);
    CAPTURE(seed);
    REQUIRE(topo.size() == static_cast<std::size_t>(spec.nodes + 1));
    CHECK(topo.positions[0].x == 0.0);
    CHECK(tree.maxRank() >= spec.depthMin);
    CHECK(tree.maxRank() <= spec.depthMax);
    CHECK(consistent(tree, topo.sink));
    for (const Link& l : topo.links) {
      CHECK(l.p >= spec.pLo);
      CHECK(l.p <= spec.pHi);
    }
    for (NodeId v : topo.producers()) {
      CHECK(tree.rank(v) == shortestHops(topo, v, topo.sink));
    }
  }
}

TEST_CASE("tree construction is a pure function of the seed")
{
  TreeSpec spec;
  auto [a, ta] = buildTree(spec, RandomStreams(4));
  auto [b, tb] = buildTree(spec, RandomStreams(4));
  REQUIRE(a.links.size() == b.links.size());
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    CHECK(a.links[i].p == b.links[i].p);
  }
  for (NodeId v = 0; v < static_cast<NodeId>(a.size()); ++v) {
    CHECK(ta.parent(v) == tb.parent(v));
  }
}

TEST_CASE("candidates exclude the parent and deeper nodes, ordered by rank then estimate")
{
  // 0 - 1 - 3, 0 - 2 - 3, 3 - 4, 1 - 2
  Topology t;
  t.positions.resize(5);
  t.adjacency.resize(5);
  t.addLink(0, 1, 0.9);
  t.addLink(0, 2, 0.9);
  t.addLink(1, 3, 0.95);
  t.addLink(2, 3, 0.85);
  t.addLink(3, 4, 0.9);
  t.addLink(1, 2, 0.9);
  TreeState tree(t);
  CHECK(tree.parent(3) == 1);
  CHECK(tree.candidates(3) == std::vector<NodeId>{2});
  CHECK(tree.candidates(4).empty());

  tree.onBeacon(1, 2, 1);
  REQUIRE(tree.candidates(1) == std::vector<NodeId>{2});
  tree.onBeacon(3, 4, 3);
  CHECK(tree.candidates(3) == std::vector<NodeId>{2});

  tree.recordLinkOutcome(1, 2, false);
  CHECK(tree.linkEstimate(1, 2) == doctest::Approx(0.8));
  tree.recordLinkOutcome(1, 2, true);
  CHECK(tree.linkEstimate(1, 2) == doctest::Approx(0.84));
}

TEST_CASE("uplink switches keep the tree acyclic and ranks consistent")
{
  TreeSpec spec;
  RandomStreams streams(6);
  auto [topo, tree] = buildTree(spec, streams);
  Rng rng(99);
  int switches = 0;
  for (int round = 0; round < 500; ++round) {
    NodeId v = 1 + static_cast<NodeId>(rng.next() % (topo.size() - 1));
    if (auto alt = tree.bestAlternative(v)) {
      CHECK(tree.rank(*alt) <= tree.rank(v));
      tree.switchParent(v, *alt);
      ++switches;
      REQUIRE(consistent(tree, topo.sink));
    }
  }
  CHECK(switches > 0);
  for (NodeId v : topo.producers()) {
    for (NodeId d : tree.subtree(v)) {
      if (d != v) {
        CHECK_THROWS(tree.switchParent(v, d));
      }
    }
  }
}

TEST_CASE("ip routes: host routes down the tree, default route up")
{
  Topology t = buildChain(3, 1.0);
  TreeState tree(t);
  RouteTables r = installRoutes(t, tree, RouteFamily::Ip);
  CHECK(r.ip[0].defaultRoute == kNoNode);
  CHECK(r.ip[0].lookup(3) == 1);
  CHECK(r.ip[1].lookup(3) == 2);
  CHECK(r.ip[1].lookup(0) == 0);
  CHECK(r.ip[3].lookup(0) == 2);
  CHECK(r.ip[0].size() == 3);
  CHECK_THROWS(installRoutes(t, tree, RouteFamily::Ip, 2));
}

TEST_CASE("ndn routes for pull and for upstream push")
{
  Topology t = buildChain(2, 1.0);
  TreeState tree(t);
  RouteTables pull = installRoutes(t, tree, RouteFamily::NdnPull);
  CHECK(pull.ndn[0].at(2) == 1);
  CHECK(pull.ndn[1].at(2) == 2);
  CHECK(pull.ndn[1].at(1) == kAppFace);
  CHECK_FALSE(pull.ndn[0].count(0));
  RouteTables up = installRoutes(t, tree, RouteFamily::NdnUp);
  CHECK(up.ndn[2].at(kDefaultPrefix) == 1);
  CHECK(up.ndn[0].at(kDefaultPrefix) == kAppFace);
}

TEST_CASE("beacons refresh candidates without reparenting")
{
  RandomStreams streams(2);
  auto [topo, tree] = buildTree(TreeSpec{}, streams);
  std::vector<NodeId> before;
  for (NodeId v = 0; v < static_cast<NodeId>(topo.size()); ++v) {
    before.push_back(tree.parent(v));
  }
  Simulator sim;
  LinkModel links(streams);
  topo.applyTo(links);
  TraceLog trace;
  Mac mac(sim, links, streams, trace, MacConfig{}, topo.size());
  BeaconService beacons(sim, mac, tree, streams, std::chrono::seconds(10), 20);
  beacons.start(SimTime{std::chrono::seconds(100)});
  sim.runUntil(SimTime{std::chrono::seconds(200)});
  std::size_t sent = 0;
  for (const TraceRecord& r : trace.records()) {
    sent += r.kind == TraceKind::Tx && r.label == "beacon" ? 1 : 0;
  }
  // 10 s +- 10 % over 100 s: 9 to 11 beacons per node
  CHECK(sent >= 9 * topo.size());
  CHECK(sent <= 11 * topo.size());
  for (NodeId v = 0; v < static_cast<NodeId>(topo.size()); ++v) {
    CHECK(tree.parent(v) == before[v]);
  }
}
