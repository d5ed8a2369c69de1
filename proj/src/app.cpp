#include "iotsim/app.hpp"

#include <stdexcept>

namespace iotsim {

void
AppContext::publish(NodeId producer, ItemId item)
{
  if (!m_published.emplace(item, m_sim.now()).second) {
    throw std::logic_error("item " + toString(item) + " published twice");
  }
  TraceRecord r;
  r.t = m_sim.now();
  r.node = producer;
  r.kind = TraceKind::Publish;
  r.label = m_protocol;
  r.item = item;
  r.appBytes = m_payload;
  r.ref = m_sim.now();
  m_trace.add(std::move(r));
}

void
AppContext::deliver(NodeId at, ItemId item)
{
  auto it = m_published.find(item);
  if (it == m_published.end()) {
    throw std::logic_error("delivery of unpublished item " + toString(item));
  }
  TraceRecord r;
  r.t = m_sim.now();
  r.node = at;
  r.kind = TraceKind::Deliver;
  r.label = m_protocol;
  r.item = item;
  r.appBytes = m_payload;
  r.ref = it->second;
  m_trace.add(std::move(r));
}

void
AppContext::event(NodeId node, std::string label, std::optional<ItemId> item)
{
  TraceRecord r;
  r.t = m_sim.now();
  r.node = node;
  r.kind = TraceKind::Event;
  r.label = std::move(label);
  r.item = item;
  m_trace.add(std::move(r));
}

std::optional<SimTime>
AppContext::publishTime(ItemId item) const
{
  auto it = m_published.find(item);
  if (it == m_published.end()) {
    return std::nullopt;
  }
  return it->second;
}

} // namespace iotsim
