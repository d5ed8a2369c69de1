#include "iotsim/ip.hpp"

#include <stdexcept>

namespace iotsim {

IpPlane::IpPlane(Simulator& sim, Mac& mac, TraceLog& trace, std::vector<IpFib> fibs,
                 IpConfig config)
  : m_sim(sim)
  , m_mac(mac)
  , m_trace(trace)
  , m_fibs(std::move(fibs))
  , m_config(config)
  , m_handlers(m_fibs.size())
  , m_relayed(m_fibs.size(), 0)
{
}

void
IpPlane::attach()
{
  for (NodeId v = 0; v < static_cast<NodeId>(m_fibs.size()); ++v) {
    auto rx = [this, v] (const Frame& f) {
      m_sim.schedule(m_config.procDelay, [this, v, f] { onFrame(v, f); });
    };
    m_mac.setReceiver(v, FrameKind::Coap, rx);
    m_mac.setReceiver(v, FrameKind::MqttSn, rx);
  }
}

void
IpPlane::setHandler(NodeId node, Handler handler)
{
  m_handlers.at(node) = std::move(handler);
}

void
IpPlane::send(const IpPacket& packet, const SendInfo& info)
{
  Frame f;
  f.src = packet.src;
  f.kind = std::holds_alternative<CoapMessage>(packet.body) ? FrameKind::Coap : FrameKind::MqttSn;
  f.label = info.label;
  f.bytes = m_config.macHeaderBytes + m_config.ipUdpBytes + info.appHeaderBytes + info.payloadBytes;
  f.item = info.item;
  f.appBytes = info.payloadBytes;
  f.packet = packet;
  transmit(packet.src, std::move(f));
}

void
IpPlane::transmit(NodeId from, Frame frame)
{
  const auto& packet = std::get<IpPacket>(frame.packet);
  NodeId next = m_fibs.at(from).lookup(packet.dst);
  if (next == kNoNode) {
    TraceRecord r;
    r.t = m_sim.now();
    r.node = from;
    r.kind = TraceKind::L3Drop;
    r.label = "no-route";
    r.item = frame.item;
    r.dst = packet.dst;
    m_trace.add(std::move(r));
    return;
  }
  frame.src = from;
  frame.dst = next;
  m_mac.unicast(std::move(frame));
}

void
IpPlane::onFrame(NodeId at, const Frame& frame)
{
  const auto& packet = std::get<IpPacket>(frame.packet);
  if (packet.dst == at) {
    if (m_handlers[at]) {
      m_handlers[at](packet);
    }
    return;
  }
  ++m_relayed[at];
  transmit(at, frame);
}

} // namespace iotsim
