#include "support.hpp"

#include "iotsim/metrics.hpp"

#include "doctest.h"

using namespace iotsim;
using namespace std::chrono_literals;
using iotsim::testing::countRecords;
using iotsim::testing::smallScenario;
using iotsim::testing::trafficFrames;

TEST_CASE("clients bootstrap during warmup")
{
  RunResult r = runExperiment(smallScenario(Protocol::MqttQ1));
  CHECK(countRecords(r.trace, TraceKind::Tx, "mqtt-connect", 1) == 1);
  CHECK(countRecords(r.trace, TraceKind::Tx, "mqtt-connack", 0) == 1);
  CHECK(countRecords(r.trace, TraceKind::Tx, "mqtt-register", 1) == 1);
  CHECK(countRecords(r.trace, TraceKind::Tx, "mqtt-regack", 0) == 1);
  bool active = false;
  for (const TraceRecord& rec : r.trace.records()) {
    if (rec.kind == TraceKind::Event && rec.label == "mqtt-active" && rec.node == 1) {
      active = true;
      CHECK(rec.t < r.trafficStart);
    }
  }
  CHECK(active);
}

TEST_CASE("qos 0 sends one frame per item, qos 1 adds a puback")
{
  RunResult q0 = runExperiment(smallScenario(Protocol::MqttQ0));
  CHECK(trafficFrames(q0) == 10);
  CHECK(countRecords(q0.trace, TraceKind::Tx, "mqtt-puback") == 0);

  RunResult q1 = runExperiment(smallScenario(Protocol::MqttQ1));
  CHECK(trafficFrames(q1) == 20);
  CHECK(countRecords(q1.trace, TraceKind::Tx, "mqtt-puback", 0) == 10);
  CHECK(lossSummary(q1.trace).rate() == 0.0);
}

TEST_CASE("qos 1 over a lossy link delivers each item once")
{
  RunResult r = runExperiment(smallScenario(Protocol::MqttQ1, 0.6, 40));
  std::map<ItemId, int> n;
  for (const TraceRecord& rec : r.trace.records()) {
    if (rec.kind == TraceKind::Deliver) {
      ++n[*rec.item];
    }
  }
  for (const auto& [item, count] : n) {
    CHECK(count == 1);
  }
  CHECK(lossSummary(r.trace).rate() < 0.1);
}

TEST_CASE("publishing before the session is up is dropped")
{
  ScenarioConfig c = smallScenario(Protocol::MqttQ0, 1.0, 20);
  c.warmup = 0s;
  c.schedule.interval = 200ms;
  c.mqtt.bootstrapSpread = 2s;
  RunResult r = runExperiment(c);
  std::size_t early = countRecords(r.trace, TraceKind::L3Drop, "not-active", 1);
  CHECK(early > 0);
  CHECK(lossSummary(r.trace).delivered == 20 - early);
}
