#pragma once

#include "iotsim/kernel.hpp"
#include "iotsim/messages.hpp"
#include "iotsim/phy_mac.hpp"
#include "iotsim/topology.hpp"
#include "iotsim/trace.hpp"

#include <functional>
#include <vector>

namespace iotsim {

struct IpConfig
{
  std::uint32_t macHeaderBytes = 23;
  /// Compressed IPv6 plus UDP header.
  std::uint32_t ipUdpBytes = 12;
  Duration procDelay{1500};
};

/// What an application hands to the IP plane besides the packet itself.
struct SendInfo
{
  std::string label;
  std::uint32_t appHeaderBytes = 0;
  std::uint32_t payloadBytes = 0;
  std::optional<ItemId> item;
};

/// Stateless hop-by-hop datagram forwarding along the IP FIBs. Only the
/// endpoints see the application messages.
class IpPlane
{
public:
  using Handler = std::function<void(const IpPacket&)>;

  IpPlane(Simulator& sim, Mac& mac, TraceLog& trace, std::vector<IpFib> fibs, IpConfig config);

  void
  attach();

  /// Local delivery of datagrams addressed to node.
  void
  setHandler(NodeId node, Handler handler);

  /// Sends from packet.src towards packet.dst.
  void
  send(const IpPacket& packet, const SendInfo& info);

  const IpConfig&
  config() const
  {
    return m_config;
  }

  /// Number of datagrams relayed by node on behalf of others.
  std::uint64_t
  relayed(NodeId node) const
  {
    return m_relayed.at(node);
  }

private:
  void
  transmit(NodeId from, Frame frame);

  void
  onFrame(NodeId at, const Frame& frame);

  Simulator& m_sim;
  Mac& m_mac;
  TraceLog& m_trace;
  std::vector<IpFib> m_fibs;
  IpConfig m_config;
  std::vector<Handler> m_handlers;
  std::vector<std::uint64_t> m_relayed;
};

} // namespace iotsim
