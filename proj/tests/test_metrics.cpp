#include "iotsim/metrics.hpp"

#include "doctest.h"

#include <sstream>

using namespace iotsim;
using namespace std::chrono_literals;

namespace {

ItemId
item(NodeId p, std::uint32_t seq)
{
  return { p, seq };
}

TraceRecord
publish(SimTime t, ItemId i)
{
  TraceRecord r;
  r.t = t;
  r.node = i.producer;
  r.kind = TraceKind::Publish;
  r.item = i;
  r.appBytes = 48;
  return r;
}

TraceRecord
deliver(SimTime t, ItemId i, SimTime published)
{
  TraceRecord r;
  r.t = t;
  r.node = 0;
  r.kind = TraceKind::Deliver;
  r.item = i;
  r.appBytes = 48;
  r.ref = published;
  return r;
}

TraceRecord
tx(SimTime t, NodeId node, std::string label, std::uint32_t bytes, std::uint32_t attempt,
   std::optional<ItemId> i = std::nullopt)
{
  TraceRecord r;
  r.t = t;
  r.node = node;
  r.src = node;
  r.kind = TraceKind::Tx;
  r.label = std::move(label);
  r.bytes = bytes;
  r.attempt = attempt;
  r.item = i;
  r.appBytes = i ? 48 : 0;
  return r;
}

TraceRecord
sample(SimTime t, NodeId node, Duration txd, Duration rxd)
{
  TraceRecord r;
  r.t = t;
  r.node = node;
  r.kind = TraceKind::StateSample;
  r.radio = { txd, rxd, t - txd - rxd };
  return r;
}

} // namespace

TEST_CASE("loss counts unique deliveries")
{
  TraceLog log;
  for (std::uint32_t s = 0; s < 4; ++s) {
    log.add(publish(SimTime(s * 1s), item(1, s)));
  }
  log.add(deliver(500ms, item(1, 0), 0s));
  log.add(deliver(600ms, item(1, 0), 0s));
  log.add(deliver(1500ms, item(1, 1), 1s));
  LossSummary l = lossSummary(log);
  CHECK(l.published == 4);
  CHECK(l.delivered == 2);
  CHECK(l.lost() == 2);
  CHECK(l.rate() == 0.5);

  CHECK_THROWS(lossSummary(TraceLog{}));
}

TEST_CASE("ttc uses the first delivery")
{
  TraceLog log;
  log.add(publish(1s, item(2, 0)));
  log.add(deliver(1400ms, item(2, 0), 1s));
  log.add(deliver(3s, item(2, 0), 1s));
  auto s = ttcSamples(log);
  REQUIRE(s.size() == 1);
  CHECK(s[0].ttc() == 400ms);
}

TEST_CASE("quantile interpolates between order statistics")
{
  CHECK(quantile({ 4, 1, 3, 2 }, 0.0) == 1.0);
  CHECK(quantile({ 4, 1, 3, 2 }, 1.0) == 4.0);
  CHECK(quantile({ 4, 1, 3, 2 }, 0.5) == 2.5);
  CHECK(quantile({ 10, 20 }, 0.25) == 12.5);
  CHECK(quantile({ 7 }, 0.9) == 7.0);
  CHECK_THROWS(quantile({}, 0.5));
}

TEST_CASE("goodput optimum and windows")
{
  CHECK(goodputOptimum(50, 48, 15s) == doctest::Approx(160.0));

  TraceLog log;
  // Two producers publishing every 2 s from t=0 to t=8.
  for (NodeId p : { 1, 2 }) {
    for (std::uint32_t s = 0; s < 5; ++s) {
      log.add(publish(SimTime(s * 2s), item(p, s)));
    }
  }
  log.add(deliver(500ms, item(1, 0), 0s));
  log.add(deliver(600ms, item(1, 0), 0s)); // duplicate, ignored
  log.add(deliver(2500ms, item(1, 1), 2s));
  log.add(deliver(2600ms, item(2, 1), 2s));
  log.add(deliver(7s, item(2, 3), 6s));
  log.finalize();

  GoodputSeries g = goodput(log, 4s, goodputOptimum(2, 48, 2s));
  REQUIRE(g.windows.size() == 2);
  CHECK(g.windows[0].start == 0s);
  CHECK(g.windows[0].bytesPerSecond == doctest::Approx(3 * 48 / 4.0));
  CHECK(g.windows[1].bytesPerSecond == doctest::Approx(48 / 4.0));
  CHECK(g.mean() == doctest::Approx((36.0 + 12.0) / 2));
  // Sample standard deviation of {36, 12} is 12 * sqrt(2).
  CHECK(g.cv() == doctest::Approx(12.0 * std::sqrt(2.0) / 24.0));
  CHECK_THROWS(goodput(log, 0s, 1.0, 0s, 8s));
}

TEST_CASE("traversals count mac retries once")
{
  TraceLog log;
  ItemId a = item(3, 0);
  log.add(tx(1s, 3, "data", 88, 1, a));
  log.add(tx(1002ms, 3, "data", 88, 2, a));
  log.add(tx(1010ms, 2, "data", 88, 1, a));
  log.add(tx(1020ms, 1, "interest", 36, 1));
  auto t = traversals(log);
  REQUIRE(t.size() == 1);
  CHECK(t[a] == 2);
}

TEST_CASE("link stress groups items by traversals, hops and outcome")
{
  Topology topo = buildChain(2, 1.0);
  TraceLog log;
  ItemId a = item(2, 0), b = item(2, 1), c = item(1, 0);
  for (ItemId i : { a, b, c }) {
    log.add(publish(0s, i));
  }
  log.add(tx(1s, 2, "coap-put", 60, 1, a));
  log.add(tx(1s, 1, "coap-put", 60, 1, a));
  log.add(deliver(1s, a, 0s));
  log.add(tx(1s, 2, "coap-put", 60, 1, b));
  log.add(tx(1s, 1, "coap-put", 60, 1, c));
  log.add(deliver(1s, c, 0s));
  auto points = linkStress(log, topo);
  REQUIRE(points.size() == 3);
  std::size_t total = 0;
  for (const auto& p : points) {
    total += p.multiplicity;
    if (p.traversals == 2) {
      CHECK(p.shortest == 2);
      CHECK(p.delivered);
    }
    if (!p.delivered) {
      CHECK(p.traversals == 1);
      CHECK(p.shortest == 2);
    }
  }
  CHECK(total == 3);
}

TEST_CASE("energy integrates state durations")
{
  TraceLog log;
  log.add(sample(0s, 4, 0s, 0s));
  log.add(sample(10s, 4, 1s, 2s));
  log.add(sample(20s, 4, 1s, 2s));
  PowerLevels pw{ 42.0, 36.9, 0.5 };
  auto points = energy(log, pw);
  REQUIRE(points.size() == 2);
  double first = 42.0 * 1 + 36.9 * 2 + 0.5 * 7;
  CHECK(points[0].windowMj == doctest::Approx(first));
  CHECK(points[1].windowMj == doctest::Approx(0.5 * 10));
  CHECK(points[1].cumulativeMj == doctest::Approx(first + 5.0));
  CHECK(energyTotals(log, pw).at(4) == doctest::Approx(first + 5.0));
  CHECK_THROWS(energy(log, PowerLevels{ 0.0, 1.0, 1.0 }));
}

TEST_CASE("overhead separates payload from control traffic")
{
  TraceLog log;
  ItemId a = item(1, 0);
  log.add(publish(0s, a));
  log.add(tx(1s, 0, "interest", 36, 1));
  log.add(tx(1002ms, 0, "interest", 36, 2)); // mac retry, not a new request
  log.add(tx(1010ms, 1, "mac-ack", 11, 1));
  log.add(tx(1020ms, 1, "data", 88, 1, a));
  log.add(deliver(1030ms, a, 0s));
  Overhead o = controlOverhead(log, 0);
  CHECK(o.payloadFrames == 1);
  CHECK(o.controlFrames == 3);
  CHECK(o.controlBytes == 36 + 36 + 11);
  CHECK(o.payloadBytes == 48);
  CHECK(o.requests == 1);
  CHECK(o.requestsPerItem() == 1.0);
  CHECK(o.byteRatio() == doctest::Approx(83.0 / 48.0));
  CHECK(o.frameRatio() == 3.0);
}

TEST_CASE("l3 attempts skip mac retries and relayed frames")
{
  TraceLog log;
  log.add(tx(0s, 1, "coap-put", 60, 1));
  log.add(tx(1ms, 1, "coap-put", 60, 2));
  log.add(tx(2s, 1, "coap-put", 60, 1));
  TraceRecord relayed = tx(3s, 1, "coap-put", 60, 1);
  relayed.src = 2;
  log.add(relayed);
  CHECK(l3Attempts(log, 1, "coap-put") == std::vector<SimTime>{ 0s, 2s });
}

TEST_CASE("trace records survive a json line round-trip")
{
  TraceRecord r = tx(1234567us, 3, "data", 88, 2, item(3, 7));
  r.dst = 1;
  r.frame = 99;
  r.radio = { 5ms, 6ms, 7ms };
  TraceRecord back = fromJsonLine(toJsonLine(r));
  CHECK(back.t == r.t);
  CHECK(back.node == 3);
  CHECK((back.kind == TraceKind::Tx));
  CHECK(back.label == "data");
  CHECK(back.item == r.item);
  CHECK(back.bytes == 88);
  CHECK(back.appBytes == 48);
  CHECK(back.src == 3);
  CHECK(back.dst == 1);
  CHECK(back.attempt == 2);
  CHECK(back.frame == 99);
  CHECK(toJsonLine(back) == toJsonLine(r));

  TraceRecord d = deliver(20s, item(3, 7), 17s);
  CHECK(fromJsonLine(toJsonLine(d)).ref == 17s);

  for (TraceKind k : { TraceKind::Tx, TraceKind::Rx, TraceKind::MacDrop, TraceKind::L3Drop, TraceKind::Publish,
                       TraceKind::Deliver, TraceKind::Expire, TraceKind::StateSample, TraceKind::Event }) {
    CHECK((traceKindFromString(toString(k)) == k));
  }
}

TEST_CASE("finalize keeps insertion order among equal times")
{
  TraceLog log;
  log.add(tx(2s, 1, "b", 1, 1));
  log.add(tx(1s, 1, "a", 1, 1));
  log.add(tx(2s, 1, "c", 1, 1));
  log.finalize();
  CHECK(log.records()[0].label == "a");
  CHECK(log.records()[1].label == "b");
  CHECK(log.records()[2].label == "c");
}
