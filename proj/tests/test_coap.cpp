#include "support.hpp"

#include "iotsim/metrics.hpp"

#include "doctest.h"

#include <map>

using namespace iotsim;
using namespace std::chrono_literals;
using iotsim::testing::countRecords;
using iotsim::testing::smallScenario;
using iotsim::testing::trafficFrames;

namespace {

std::map<ItemId, int>
deliveriesPerItem(const TraceLog& trace)
{
  std::map<ItemId, int> n;
  for (const TraceRecord& rec : trace.records()) {
    if (rec.kind == TraceKind::Deliver) {
      ++n[*rec.item];
    }
  }
  return n;
}

} // namespace

TEST_CASE("frames per item on a perfect link")
{
  struct Case
  {
    Protocol protocol;
    std::size_t frames;
  };
  for (Case k : { Case{ Protocol::CoapPutN, 1 }, Case{ Protocol::CoapPutC, 2 }, Case{ Protocol::CoapGetN, 2 },
                  Case{ Protocol::CoapGetC, 2 }, Case{ Protocol::CoapObs, 1 } }) {
    CAPTURE(toString(k.protocol));
    RunResult r = runExperiment(smallScenario(k.protocol));
    CHECK(lossSummary(r.trace).rate() == 0.0);
    CHECK(trafficFrames(r) == 10 * k.frames);
  }
}

TEST_CASE("con put retransmits every retx interval and then gives up")
{
  ScenarioConfig c = smallScenario(Protocol::CoapPutC, 0.0, 1);
  RunResult r = runExperiment(c);
  std::vector<SimTime> tx = l3Attempts(r.trace, 1, "coap-put");
  REQUIRE(tx.size() == 5);
  for (std::size_t k = 1; k < tx.size(); ++k) {
    CHECK(tx[k] - tx[k - 1] == 2s);
  }
  CHECK(countRecords(r.trace, TraceKind::L3Drop, "exchange-timeout", 1) == 1);
  CHECK(lossSummary(r.trace).delivered == 0);
}

TEST_CASE("non put is sent once even if lost")
{
  RunResult r = runExperiment(smallScenario(Protocol::CoapPutN, 0.0, 3));
  CHECK(l3Attempts(r.trace, 1, "coap-put").size() == 3);
  CHECK(lossSummary(r.trace).delivered == 0);
}

TEST_CASE("a blocked con exchange overflows the nstart queue")
{
  ScenarioConfig c = smallScenario(Protocol::CoapPutC, 0.0, 10);
  c.schedule.interval = 1s;
  RunResult r = runExperiment(c);
  // One outstanding, one queued, the rest rejected while the first spends
  // its 10 s retransmission budget.
  CHECK(countRecords(r.trace, TraceKind::L3Drop, "nstart-queue", 1) > 0);
  CHECK(countRecords(r.trace, TraceKind::L3Drop, "nstart-queue", 1) +
          countRecords(r.trace, TraceKind::L3Drop, "exchange-timeout", 1) ==
        10);
}

TEST_CASE("con put over a lossy link delivers each item once")
{
  RunResult r = runExperiment(smallScenario(Protocol::CoapPutC, 0.6, 40));
  for (const auto& [item, n] : deliveriesPerItem(r.trace)) {
    CHECK(n == 1);
  }
  CHECK(lossSummary(r.trace).rate() < 0.1);
}

TEST_CASE("observe registers once and notifies without acknowledgement")
{
  RunResult r = runExperiment(smallScenario(Protocol::CoapObs));
  CHECK(countRecords(r.trace, TraceKind::Event, "observe-register") == 1);
  CHECK(countRecords(r.trace, TraceKind::Tx, "coap-notify", 1) == 10);
  for (const TraceRecord& rec : r.trace.records()) {
    // The registration is the only confirmable exchange.
    if (rec.kind == TraceKind::Tx && (rec.label == "coap-get" || rec.label == "coap-ack")) {
      CHECK(rec.t < r.trafficStart);
    }
  }
}

TEST_CASE("unscheduled get polls about twice per item")
{
  // Items every U[1,3] s, polled every second: two requests per item on average.
  ScenarioConfig c = smallScenario(Protocol::CoapGetN, 1.0, 400);
  c.schedule.mode = ScheduleSpec::Mode::Uniform;
  c.pull = PullMode::Unscheduled;
  RunResult r = runExperiment(c);
  Overhead o = controlOverhead(r.trace, 0);
  CHECK(o.deliveredItems == 400);
  CHECK(o.requestsPerItem() == doctest::Approx(2.0).epsilon(0.1));
}
