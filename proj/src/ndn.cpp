#include "iotsim/ndn.hpp"

#include <stdexcept>

namespace iotsim {

Pit::Pit(std::size_t capacity, PitPolicy policy)
  : m_capacity(capacity)
  , m_policy(policy)
{
  if (capacity == 0) {
    throw std::invalid_argument("PIT capacity must be positive");
  }
}

PitEntry*
Pit::find(const Name& name)
{
  auto it = m_entries.find(name);
  return it == m_entries.end() ? nullptr : &it->second;
}

Pit::Insert
Pit::insert(PitEntry entry, std::optional<PitEntry>& evicted)
{
  Insert result = Insert::Inserted;
  if (m_entries.size() >= m_capacity) {
    if (m_policy == PitPolicy::DropNew) {
      return Insert::Dropped;
    }
    auto oldest = m_entries.begin();
    for (auto it = m_entries.begin(); it != m_entries.end(); ++it) {
      if (it->second.order < oldest->second.order) {
        oldest = it;
      }
    }
    evicted = std::move(oldest->second);
    m_entries.erase(oldest);
    result = Insert::Overwrote;
  }
  entry.order = m_nextOrder++;
  Name name = entry.interest.name;
  m_entries.emplace(name, std::move(entry));
  return result;
}

std::optional<PitEntry>
Pit::erase(const Name& name)
{
  auto it = m_entries.find(name);
  if (it == m_entries.end()) {
    return std::nullopt;
  }
  PitEntry entry = std::move(it->second);
  m_entries.erase(it);
  return entry;
}

ContentStore::ContentStore(std::uint32_t capacityBytes)
  : m_capacity(capacityBytes)
{
}

bool
ContentStore::insert(const Name& name, std::uint32_t payloadLen, bool pinned)
{
  if (payloadLen > m_capacity) {
    throw std::invalid_argument("payload larger than the content store");
  }
  if (auto it = m_index.find(name); it != m_index.end()) {
    it->second->pinned = it->second->pinned || pinned;
    m_lru.splice(m_lru.begin(), m_lru, it->second);
    return true;
  }
  std::uint32_t pinnedBytes = 0;
  for (const Entry& e : m_lru) {
    pinnedBytes += e.pinned ? e.len : 0;
  }
  if (pinnedBytes + payloadLen > m_capacity) {
    // refuse without evicting anything
    return false;
  }
  auto victim = m_lru.end();
  while (m_used + payloadLen > m_capacity) {
    // walk from the least recently used end, skipping pinned entries
    --victim;
    if (victim->pinned) {
      continue;
    }
    m_used -= victim->len;
    m_index.erase(victim->name);
    victim = m_lru.erase(victim);
  }
  m_lru.push_front({name, payloadLen, pinned});
  m_index[name] = m_lru.begin();
  m_used += payloadLen;
  return true;
}

std::optional<std::uint32_t>
ContentStore::lookup(const Name& name)
{
  auto it = m_index.find(name);
  if (it == m_index.end()) {
    return std::nullopt;
  }
  m_lru.splice(m_lru.begin(), m_lru, it->second);
  return it->second->len;
}

void
ContentStore::unpin(const Name& name)
{
  if (auto it = m_index.find(name); it != m_index.end()) {
    it->second->pinned = false;
  }
}

Forwarder::Forwarder(NodeId id, Simulator& sim, Mac& mac, TraceLog& trace, NdnConfig config)
  : m_id(id)
  , m_sim(sim)
  , m_mac(mac)
  , m_trace(trace)
  , m_config(config)
  , m_pit(config.pitCapacity, config.pitPolicy)
  , m_cs(config.csBytes)
{
}

void
Forwarder::attach()
{
  m_mac.setReceiver(m_id, FrameKind::Interest, [this] (const Frame& f) {
    m_sim.schedule(m_config.procDelay,
                   [this, face = f.src, i = std::get<Interest>(f.packet)] { onInterest(face, i); });
  });
  m_mac.setReceiver(m_id, FrameKind::Data, [this] (const Frame& f) {
    m_sim.schedule(m_config.procDelay,
                   [this, face = f.src, d = std::get<Data>(f.packet)] { onData(face, d); });
  });
}

NodeId
Forwarder::nextHop(const Name& name) const
{
  if (auto it = m_fib.find(name.prefix); it != m_fib.end()) {
    return it->second;
  }
  if (auto it = m_fib.find(kDefaultPrefix); it != m_fib.end()) {
    return it->second;
  }
  return kNoNode;
}

void
Forwarder::traceL3(TraceKind kind, std::string_view label, const Name& name, NodeId face)
{
  TraceRecord r;
  r.t = m_sim.now();
  r.node = m_id;
  r.kind = kind;
  r.label = std::string(label);
  r.item = name.item();
  r.src = face;
  m_trace.add(std::move(r));
}

bool
Forwarder::expressInterest(const Interest& interest)
{
  if (!interest.isNotification()) {
    if (auto len = m_cs.lookup(interest.name)) {
      if (m_appData) {
        m_appData(Data{interest.name, *len, false});
      }
      return true;
    }
  }
  if (PitEntry* e = m_pit.find(interest.name)) {
    e->inFaces.insert(kAppFace);
    return true;
  }
  NodeId out = nextHop(interest.name);
  if (out == kNoNode) {
    traceL3(TraceKind::L3Drop, "no-route", interest.name, kAppFace);
    return false;
  }
  return expressInterestVia(interest, out);
}

bool
Forwarder::expressInterestVia(const Interest& interest, NodeId face)
{
  if (PitEntry* e = m_pit.find(interest.name)) {
    e->inFaces.insert(kAppFace);
    return true;
  }
  if (!createEntry(interest, kAppFace, face)) {
    return false;
  }
  forward(interest.name);
  return true;
}

bool
Forwarder::createEntry(const Interest& interest, NodeId inFace, NodeId outFace)
{
  if (interest.lifetime <= Duration::zero()) {
    throw std::invalid_argument("Interest lifetime must be positive");
  }
  PitEntry entry;
  entry.interest = interest;
  entry.inFaces.insert(inFace);
  entry.outFace = outFace;
  entry.created = m_sim.now();
  entry.expiry = m_sim.now() + interest.lifetime;
  std::optional<PitEntry> evicted;
  switch (m_pit.insert(std::move(entry), evicted)) {
    case Pit::Insert::Dropped:
      traceL3(TraceKind::L3Drop, "pit-drop", interest.name, inFace);
      return false;
    case Pit::Insert::Overwrote:
      m_sim.cancel(evicted->retxTimer);
      m_sim.cancel(evicted->expiryTimer);
      traceL3(TraceKind::L3Drop, "pit-overwrite", evicted->interest.name, kNoNode);
      break;
    case Pit::Insert::Inserted:
      break;
  }
  PitEntry* e = m_pit.find(interest.name);
  e->expiryTimer = m_sim.schedule(interest.lifetime, [this, name = interest.name] { expire(name); });
  return true;
}

void
Forwarder::forward(const Name& name)
{
  PitEntry* e = m_pit.find(name);
  if (e->outFace == kAppFace) {
    if (m_appInterest) {
      // the handler may answer synchronously and erase the entry
      Interest copy = e->interest;
      m_appInterest(copy, *e->inFaces.begin());
    }
    return;
  }
  sendInterest(e->outFace, e->interest, 0);
  if (m_config.retxTrigger == RetxTrigger::Timer) {
    armRetx(name);
  }
}

void
Forwarder::armRetx(const Name& name)
{
  PitEntry* e = m_pit.find(name);
  if (e == nullptr || e->retxCount >= m_config.maxRetx) {
    return;
  }
  if (m_sim.now() + m_config.retxInterval >= e->expiry) {
    return;
  }
  e->retxTimer = m_sim.schedule(m_config.retxInterval, [this, name] { retransmit(name); });
}

void
Forwarder::retransmit(const Name& name)
{
  PitEntry* e = m_pit.find(name);
  if (e == nullptr) {
    return;
  }
  ++e->retxCount;
  sendInterest(e->outFace, e->interest, static_cast<std::uint32_t>(e->retxCount));
  if (m_config.retxTrigger == RetxTrigger::Timer) {
    armRetx(name);
  }
}

void
Forwarder::expire(const Name& name)
{
  auto entry = m_pit.erase(name);
  if (!entry) {
    return;
  }
  m_sim.cancel(entry->retxTimer);
  traceL3(TraceKind::Expire, "pit-expire", name, entry->outFace);
  if (entry->inFaces.count(kAppFace) && m_appExpire) {
    m_appExpire(entry->interest);
  }
}

void
Forwarder::onInterest(NodeId face, const Interest& interest)
{
  if (m_interestSeen) {
    m_interestSeen(interest, face);
  }
  if (!interest.isNotification()) {
    if (auto len = m_cs.lookup(interest.name)) {
      traceL3(TraceKind::Event, "cs-hit", interest.name, face);
      sendData(face, Data{interest.name, *len, false});
      return;
    }
  }
  if (PitEntry* e = m_pit.find(interest.name)) {
    e->inFaces.insert(face);
    return;
  }
  NodeId out = nextHop(interest.name);
  if (out == kNoNode || out == face) {
    traceL3(TraceKind::L3Drop, "no-route", interest.name, face);
    return;
  }
  if (createEntry(interest, face, out)) {
    forward(interest.name);
  }
}

void
Forwarder::onData(NodeId face, const Data& data)
{
  auto entry = m_pit.erase(data.name);
  if (!entry) {
    traceL3(TraceKind::L3Drop, "unsolicited", data.name, face);
    return;
  }
  if (m_config.cacheData && !data.notificationAck) {
    m_cs.insert(data.name, data.payloadLen);
  }
  satisfy(std::move(*entry), data);
}

void
Forwarder::putData(const Data& data, bool pinned)
{
  if (m_config.cacheData && !data.notificationAck) {
    m_cs.insert(data.name, data.payloadLen, pinned);
  }
  if (auto entry = m_pit.erase(data.name)) {
    satisfy(std::move(*entry), data);
  }
}

void
Forwarder::satisfy(PitEntry entry, const Data& data)
{
  m_sim.cancel(entry.retxTimer);
  m_sim.cancel(entry.expiryTimer);
  for (NodeId f : entry.inFaces) {
    if (f == kAppFace) {
      if (m_appData) {
        m_appData(data);
      }
    }
    else {
      sendData(f, data);
    }
  }
}

void
Forwarder::sendInterest(NodeId face, const Interest& interest, std::uint32_t attempt)
{
  Frame f;
  f.src = m_id;
  f.dst = face;
  f.kind = FrameKind::Interest;
  f.label = interest.isNotification() ? "notification" : "interest";
  f.bytes = m_config.macHeaderBytes + m_config.sizing.interestBytes(interest.payloadLen);
  f.item = interest.name.item();
  f.appBytes = interest.payloadLen;
  f.packet = interest;
  Name name = interest.name;
  m_mac.unicast(std::move(f), [this, face, name, attempt] (const MacOutcome& o) {
    if (m_linkObserver) {
      m_linkObserver(face, o.delivered);
    }
    if (!o.delivered && m_config.retxTrigger == RetxTrigger::MacFailure) {
      PitEntry* e = m_pit.find(name);
      if (e != nullptr && e->retxCount == static_cast<int>(attempt)) {
        armRetx(name);
      }
    }
  });
}

void
Forwarder::sendData(NodeId face, const Data& data)
{
  Frame f;
  f.src = m_id;
  f.dst = face;
  f.kind = FrameKind::Data;
  f.label = data.notificationAck ? "notif-ack" : "data";
  f.bytes = m_config.macHeaderBytes + m_config.sizing.dataBytes(data.payloadLen);
  f.item = data.name.item();
  f.appBytes = data.payloadLen;
  f.packet = data;
  m_mac.unicast(std::move(f), [this, face] (const MacOutcome& o) {
    if (m_linkObserver) {
      m_linkObserver(face, o.delivered);
    }
  });
}

} // namespace iotsim
