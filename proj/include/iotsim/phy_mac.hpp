#pragma once

#include "iotsim/kernel.hpp"
#include "iotsim/messages.hpp"
#include "iotsim/trace.hpp"

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iotsim {

enum class FrameKind { Interest, Data, Pa, Coap, MqttSn, Beacon, MacAck };

std::string_view
toString(FrameKind kind);

/// The unit crossing the radio.
struct Frame
{
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  /// MAC frame length (header, payload, FCS), without PHY framing.
  std::uint32_t bytes = 0;
  FrameKind kind = FrameKind::Beacon;
  std::string label;
  std::optional<ItemId> item;
  std::uint32_t appBytes = 0;
  Packet packet;
  /// Assigned by the MAC when the exchange starts.
  std::uint64_t id = 0;
};

inline constexpr std::uint32_t kMaxFrameBytes = 127;

/// Two-state (good/bad) link fading. In the bad state a link delivers with
/// at most badDeliveryProb; dwell times are exponential.
struct FadingConfig
{
  bool enabled = false;
  double badDeliveryProb = 0.05;
  Duration meanGood = std::chrono::seconds(120);
  Duration meanBad = std::chrono::seconds(6);
};

class LinkModel
{
public:
  LinkModel(const RandomStreams& streams, FadingConfig fading = {},
            double bitRate = 250000.0, std::uint32_t phyOverheadBytes = 6);

  void
  setDeliveryProb(NodeId from, NodeId to, double p);

  void
  setSymmetric(NodeId a, NodeId b, double p)
  {
    setDeliveryProb(a, b, p);
    setDeliveryProb(b, a, p);
  }

  bool
  hasLink(NodeId from, NodeId to) const;

  /// Nominal (good-state) delivery probability.
  double
  deliveryProb(NodeId from, NodeId to) const;

  /// Delivery probability of an attempt starting at t, fading included.
  double
  deliveryProbAt(NodeId from, NodeId to, SimTime t);

  bool
  isFaded(NodeId a, NodeId b, SimTime t);

  const std::vector<NodeId>&
  neighbors(NodeId node) const;

  /// Time on air of a frame of the given MAC length.
  Duration
  airtime(std::uint32_t frameBytes) const;

  std::uint32_t
  phyOverheadBytes() const
  {
    return m_phyOverhead;
  }

private:
  struct FadeState
  {
    bool bad = false;
    SimTime nextSwitch{0};
    Rng rng;
  };

  FadeState&
  fadeState(NodeId a, NodeId b);

  const RandomStreams& m_streams;
  FadingConfig m_fading;
  double m_bitRate;
  std::uint32_t m_phyOverhead;
  std::map<std::pair<NodeId, NodeId>, double> m_prob;
  std::map<std::pair<NodeId, NodeId>, FadeState> m_fade;
  std::map<NodeId, std::vector<NodeId>> m_neighbors;
  std::vector<NodeId> m_none;
};

struct MacConfig
{
  int maxFrameRetries = 3;
  Duration ackTimeout{900};
  Duration backoffMin{300};
  Duration backoffMax{2000};
  Duration turnaround{192};
  std::uint32_t ackBytes = 11;
  std::uint32_t headerBytes = 23;
};

struct MacOutcome
{
  bool delivered = false;
  int attempts = 0;
};

enum class RadioState { Tx, Rx };

/// Per-node radio occupancy. Intervals are kept non-overlapping; a half-duplex
/// radio cannot be in two states at once, so overlapping time is clipped.
class RadioLog
{
public:
  explicit RadioLog(std::size_t nodeCount);

  void
  add(NodeId node, SimTime start, SimTime end, RadioState state);

  /// Durations accumulated in [0, at); idle is the remainder.
  RadioTotals
  totalsAt(NodeId node, SimTime at) const;

  /// Per-window (tx, rx, idle) durations covering [0, runEnd).
  std::vector<RadioTotals>
  windows(NodeId node, Duration window, SimTime runEnd) const;

  std::size_t
  nodeCount() const
  {
    return m_nodes.size();
  }

private:
  struct Interval
  {
    SimTime start;
    SimTime end;
    RadioState state;
  };
  struct NodeLog
  {
    std::vector<Interval> intervals;
    // cumulative tx / rx duration up to and including interval i
    std::vector<Duration> cumTx;
    std::vector<Duration> cumRx;
    SimTime busyUntil{0};
  };

  std::vector<NodeLog> m_nodes;
};

/// IEEE 802.15.4-like MAC: acknowledged unicast with fast retries, and
/// unacknowledged broadcast. Each node transmits one frame at a time; frames
/// submitted while the transmitter is busy wait in a FIFO queue.
class Mac
{
public:
  using ReceiveHandler = std::function<void(const Frame&)>;
  using DoneHandler = std::function<void(const MacOutcome&)>;

  Mac(Simulator& sim, LinkModel& links, const RandomStreams& streams, TraceLog& trace,
      MacConfig config, std::size_t nodeCount);

  /// Installs the upper-layer handler for frames of one kind arriving at node.
  void
  setReceiver(NodeId node, FrameKind kind, ReceiveHandler handler);

  void
  unicast(Frame frame, DoneHandler done = {});

  void
  broadcast(Frame frame);

  const MacConfig&
  config() const
  {
    return m_config;
  }

  RadioLog&
  radio()
  {
    return m_radio;
  }

  const RadioLog&
  radio() const
  {
    return m_radio;
  }

  LinkModel&
  links()
  {
    return m_links;
  }

  std::size_t
  queueLength(NodeId node) const
  {
    return m_nodes.at(node).queue.size();
  }

private:
  struct Pending
  {
    Frame frame;
    DoneHandler done;
  };
  struct NodeState
  {
    std::deque<Pending> queue;
    bool busy = false;
    Rng rng;
    std::map<NodeId, std::uint64_t> lastDelivered;
  };

  void
  validate(const Frame& frame) const;

  void
  startNext(NodeId node);

  void
  attempt(NodeId node, int attemptNo);

  void
  finish(NodeId node, MacOutcome outcome);

  void
  doBroadcast(NodeId node);

  void
  deliver(const Frame& frame, NodeId to);

  void
  traceFrame(TraceKind kind, NodeId node, SimTime t, const Frame& f, int attemptNo,
             std::string_view label = {});

  Simulator& m_sim;
  LinkModel& m_links;
  TraceLog& m_trace;
  MacConfig m_config;
  RadioLog m_radio;
  std::vector<NodeState> m_nodes;
  std::vector<std::map<FrameKind, ReceiveHandler>> m_receivers;
  std::uint64_t m_nextFrameId = 1;
};

} // namespace iotsim
