#include "doctest.h"

#include "iotsim/ndn.hpp"
#include "iotsim/topology.hpp"

#include <memory>

using namespace iotsim;
using namespace std::chrono_literals;

namespace {

PitEntry
entryFor(NodeId prefix, std::uint32_t seq)
{
  PitEntry e;
  e.interest.name = {prefix, seq};
  return e;
}

/// Consumer 0, relay 1, producer 2 on a line with pull routes.
struct Line
{
  explicit Line(double p, NdnConfig cfg = {}, std::uint64_t seed = 1)
    : streams(seed)
    , links(streams)
    , topo(buildChain(2, p))
    , tree(topo)
    , mac(sim, links, streams, trace, MacConfig{}, 3)
  {
    topo.applyTo(links);
    RouteTables routes = installRoutes(topo, tree, RouteFamily::NdnPull);
    for (NodeId v = 0; v < 3; ++v) {
      fwd.push_back(std::make_unique<Forwarder>(v, sim, mac, trace, cfg));
      fwd[v]->fib() = routes.ndn[v];
      fwd[v]->attach();
    }
    fwd[0]->onAppData([this](const Data& d) { received.push_back(d.name); });
    fwd[0]->onAppExpire([this](const Interest&) { ++expired; });
  }

  Interest
  interest(std::uint32_t seq) const
  {
    return Interest{{2, seq}, 10s, 0};
  }

  std::vector<SimTime>
  txTimes(NodeId node, const std::string& label) const
  {
    std::vector<SimTime> out;
    for (const TraceRecord& r : trace.records()) {
      if (r.kind == TraceKind::Tx && r.node == node && r.label == label && r.attempt == 1) {
        out.push_back(r.t);
      }
    }
    return out;
  }

  std::size_t
  count(TraceKind kind, const std::string& label) const
  {
    std::size_t n = 0;
    for (const TraceRecord& r : trace.records()) {
      n += r.kind == kind && r.label == label ? 1 : 0;
    }
    return n;
  }

  Simulator sim;
  RandomStreams streams;
  LinkModel links;
  Topology topo;
  TreeState tree;
  TraceLog trace;
  Mac mac;
  std::vector<std::unique_ptr<Forwarder>> fwd;
  std::vector<Name> received;
  int expired = 0;
};

} // namespace

TEST_CASE("pit drop-new refuses entries beyond capacity")
{
  Pit pit(2, PitPolicy::DropNew);
  std::optional<PitEntry> evicted;
  CHECK(pit.insert(entryFor(1, 0), evicted) == Pit::Insert::Inserted);
  CHECK(pit.insert(entryFor(1, 1), evicted) == Pit::Insert::Inserted);
  CHECK(pit.insert(entryFor(1, 2), evicted) == Pit::Insert::Dropped);
  CHECK(pit.size() == 2);
  CHECK(pit.find({1, 2}) == nullptr);
  CHECK(pit.erase({1, 0}).has_value());
  CHECK(pit.insert(entryFor(1, 2), evicted) == Pit::Insert::Inserted);
}

TEST_CASE("pit overwrite-oldest evicts the oldest entry")
{
  Pit pit(2, PitPolicy::OverwriteOldest);
  std::optional<PitEntry> evicted;
  pit.insert(entryFor(1, 5), evicted);
  pit.insert(entryFor(1, 3), evicted);
  CHECK(pit.insert(entryFor(1, 9), evicted) == Pit::Insert::Overwrote);
  REQUIRE(evicted.has_value());
  CHECK(evicted->interest.name == Name{1, 5});
  CHECK(pit.find({1, 3}) != nullptr);
  CHECK(pit.size() == 2);
}

TEST_CASE("content store is a byte-bounded LRU that keeps pinned items")
{
  ContentStore cs(100);
  CHECK(cs.insert({1, 0}, 40, true));
  CHECK(cs.insert({1, 1}, 40));
  CHECK(cs.lookup({1, 1}) == 40u);
  CHECK(cs.insert({1, 2}, 40));
  CHECK(cs.contains({1, 0}));
  CHECK_FALSE(cs.contains({1, 1}));
  CHECK(cs.usedBytes() == 80);
  CHECK(cs.insert({1, 3}, 20));
  CHECK(cs.usedBytes() == 100);
  CHECK_FALSE(cs.insert({1, 4}, 70));
  cs.unpin({1, 0});
  CHECK(cs.insert({1, 5}, 60));
  CHECK_FALSE(cs.contains({1, 0}));
  CHECK(cs.usedBytes() <= cs.capacityBytes());
  CHECK_THROWS(cs.insert({1, 6}, 200));
}

TEST_CASE("interest and data sizes")
{
  NdnSizing s;
  CHECK(s.interestBytes(0) == 36);
  CHECK(s.dataBytes(48) == 88);
}

TEST_CASE("interest is satisfied from the producer, then from the relay cache")
{
  Line net(1.0);
  net.fwd[2]->putData({{2, 0}, 48});
  REQUIRE(net.fwd[0]->expressInterest(net.interest(0)));
  net.sim.runUntil(SimTime{1s});
  CHECK(net.received == std::vector<Name>{{2, 0}});
  CHECK(net.fwd[1]->cs().contains({2, 0}));
  CHECK(net.fwd[0]->pit().size() == 0);

  // a repeated request reaching the relay is answered from its cache
  net.fwd[1]->onInterest(0, net.interest(0));
  net.sim.runUntil(SimTime{2s});
  CHECK(net.txTimes(2, "data").size() == 1);
  CHECK(net.txTimes(1, "data").size() == 2);
}

TEST_CASE("pending interests aggregate")
{
  Line net(1.0);
  net.fwd[0]->expressInterest(net.interest(4));
  net.fwd[0]->expressInterest(net.interest(4));
  net.sim.runUntil(SimTime{100ms});
  CHECK(net.txTimes(0, "interest").size() == 1);
  net.fwd[2]->putData({{2, 4}, 48});
  net.sim.runUntil(SimTime{200ms});
  CHECK(net.received.size() == 1);
}

TEST_CASE("dead link: retransmissions every 2 s, expiry at the lifetime")
{
  Line net(0.0);
  net.fwd[0]->expressInterest(net.interest(0));
  net.sim.runUntil(SimTime{30s});
  auto tx = net.txTimes(0, "interest");
  REQUIRE(tx.size() == 5);
  for (std::size_t i = 0; i < tx.size(); ++i) {
    CHECK(tx[i] == SimTime{2s * static_cast<int>(i)});
  }
  CHECK(net.expired == 1);
  CHECK(net.count(TraceKind::Expire, "pit-expire") == 1);
  CHECK(net.fwd[0]->pit().size() == 0);
}

TEST_CASE("mac-failure trigger skips retransmission after a delivered frame")
{
  NdnConfig cfg;
  cfg.retxTrigger = RetxTrigger::MacFailure;
  Line net(1.0, cfg);
  net.fwd[0]->expressInterest(net.interest(7));
  net.sim.runUntil(SimTime{30s});
  CHECK(net.txTimes(0, "interest").size() == 1);
  CHECK(net.expired == 1);
}

TEST_CASE("a full pit drops new interests")
{
  NdnConfig cfg;
  cfg.pitCapacity = 1;
  Line net(1.0, cfg);
  net.fwd[0]->expressInterest(net.interest(0));
  net.sim.runUntil(SimTime{100ms});
  CHECK_FALSE(net.fwd[0]->expressInterest(net.interest(1)));
  CHECK(net.count(TraceKind::L3Drop, "pit-drop") == 1);
}

TEST_CASE("unsolicited data and unroutable interests are dropped")
{
  Line net(1.0);
  net.fwd[2]->onData(1, Data{{2, 0}, 48});
  CHECK(net.count(TraceKind::L3Drop, "unsolicited") == 1);
  CHECK_FALSE(net.fwd[0]->expressInterest(Interest{{9, 0}, 10s, 0}));
  CHECK(net.count(TraceKind::L3Drop, "no-route") == 1);
}
