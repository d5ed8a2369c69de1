#pragma once

#include "iotsim/types.hpp"

#include <map>

namespace iotsim {

/// Producer side of one protocol on one node.
class ProducerApp
{
public:
  virtual ~ProducerApp() = default;

  /// Warm-up actions (bootstrap, registration).
  virtual void
  start()
  {
  }

  virtual void
  publish(std::uint32_t seq) = 0;
};

/// Sink side: consumer, broker or content proxy.
class SinkApp
{
public:
  virtual ~SinkApp() = default;

  virtual void
  start()
  {
  }

  /// Called right after a producer published; scheduled pull requests here.
  virtual void
  afterPublish(NodeId /*producer*/, std::uint32_t /*seq*/)
  {
  }
};

/// Unscheduled polling: every producer is polled at a fixed period until
/// its last item is in, or until the stop time.
struct PollPlan
{
  Duration interval = std::chrono::seconds(1);
  std::map<NodeId, std::uint32_t> itemsPerProducer;
  SimTime start{0};
  SimTime stop{0};
};

} // namespace iotsim
