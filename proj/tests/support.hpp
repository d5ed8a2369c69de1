#pragma once

// Shared helpers for the test binaries.

#include "iotsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace iotsim::testing {

inline ScenarioConfig
preset(const std::string& name, Protocol protocol)
{
  ScenarioConfig c = loadScenario(std::string(IOTSIM_PRESET_DIR) + "/" + name + ".json");
  c.protocol = protocol;
  return c;
}

/// Lossless single-hop scenario with a few items, for protocol behaviour tests.
inline ScenarioConfig
smallScenario(Protocol protocol, double p = 1.0, std::uint32_t items = 10)
{
  ScenarioConfig c;
  c.name = "small";
  c.protocol = protocol;
  c.topology.kind = TopologySpec::Kind::SingleHop;
  c.topology.p = p;
  c.schedule.itemsPerNode = items;
  return c;
}

inline std::size_t
countRecords(const TraceLog& trace, TraceKind kind, const std::string& label, NodeId node = kNoNode)
{
  std::size_t n = 0;
  for (const TraceRecord& r : trace.records()) {
    n += r.kind == kind && r.label == label && (node == kNoNode || r.node == node) ? 1 : 0;
  }
  return n;
}

/// First-attempt L3 frames sent after traffic start (MAC acks and beacons excluded).
inline std::size_t
trafficFrames(const RunResult& r)
{
  std::size_t n = 0;
  for (const TraceRecord& rec : r.trace.records()) {
    n += rec.kind == TraceKind::Tx && rec.attempt == 1 && rec.t >= r.trafficStart && rec.label != "mac-ack" &&
             rec.label != "beacon"
           ? 1
           : 0;
  }
  return n;
}

/// Applies fn to every input on a small thread pool; results keep input order.
template<typename In, typename Fn>
auto
parallelMap(const std::vector<In>& inputs, Fn fn)
{
  using Out = decltype(fn(inputs.front()));
  std::vector<Out> out(inputs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex errorMutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      try {
        out[i] = fn(inputs[i]);
      }
      catch (...) {
        std::lock_guard lock(errorMutex);
        error = std::current_exception();
      }
    }
  };
  unsigned n = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& th : pool) {
    th.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
  return out;
}

} // namespace iotsim::testing
