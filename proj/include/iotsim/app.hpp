#pragma once

#include "iotsim/kernel.hpp"
#include "iotsim/trace.hpp"

#include <map>
#include <optional>
#include <string>

namespace iotsim {

/// Application-level bookkeeping shared by all protocols of one run: emits
/// publish and deliver records and remembers publish times for TTC.
class AppContext
{
public:
  AppContext(Simulator& sim, TraceLog& trace, std::string protocol, std::uint32_t payloadBytes)
    : m_sim(sim)
    , m_trace(trace)
    , m_protocol(std::move(protocol))
    , m_payload(payloadBytes)
  {
  }

  std::uint32_t
  payloadBytes() const
  {
    return m_payload;
  }

  const std::string&
  protocol() const
  {
    return m_protocol;
  }

  Simulator&
  sim()
  {
    return m_sim;
  }

  TraceLog&
  trace()
  {
    return m_trace;
  }

  void
  publish(NodeId producer, ItemId item);

  /// Item reached the sink application; duplicates are recorded too and
  /// resolved by the metrics.
  void
  deliver(NodeId at, ItemId item);

  void
  event(NodeId node, std::string label, std::optional<ItemId> item = std::nullopt);

  std::optional<SimTime>
  publishTime(ItemId item) const;

private:
  Simulator& m_sim;
  TraceLog& m_trace;
  std::string m_protocol;
  std::uint32_t m_payload;
  std::map<ItemId, SimTime> m_published;
};

} // namespace iotsim
