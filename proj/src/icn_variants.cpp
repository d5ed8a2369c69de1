#include "iotsim/icn_variants.hpp"

#include <algorithm>

namespace iotsim {

void
NdnProducer::publish(std::uint32_t seq)
{
  Name name{m_fwd.id(), seq};
  m_app.publish(m_fwd.id(), name.item());
  m_fwd.putData(Data{name, m_app.payloadBytes(), false});
}

NdnConsumer::NdnConsumer(Forwarder& fwd, AppContext& app, NdnConsumerConfig config,
                         std::optional<PollPlan> poll)
  : m_fwd(fwd)
  , m_app(app)
  , m_config(config)
  , m_poll(std::move(poll))
{
  m_fwd.onAppData([this] (const Data& d) {
    if (auto it = m_prefixes.find(d.name.prefix); it != m_prefixes.end()) {
      it->second.outstanding.erase(d.name.seq);
    }
    m_reexpressed.erase(d.name);
    m_app.deliver(m_fwd.id(), d.name.item());
  });
  m_fwd.onAppExpire([this] (const Interest& i) {
    int& count = m_reexpressed[i.name];
    if (count >= m_config.maxReexpress) {
      if (auto it = m_prefixes.find(i.name.prefix); it != m_prefixes.end()) {
        it->second.outstanding.erase(i.name.seq);
      }
      return;
    }
    ++count;
    if (m_poll) {
      // re-expressed on the next poll tick
      m_prefixes[i.name.prefix].retry.push_back(i.name.seq);
    }
    else {
      express(i.name);
    }
  });
}

void
NdnConsumer::start()
{
  if (!m_poll) {
    return;
  }
  for (const auto& [producer, items] : m_poll->itemsPerProducer) {
    m_prefixes[producer];
  }
  m_app.sim().scheduleAt(m_poll->start, [this] { tick(); });
}

void
NdnConsumer::afterPublish(NodeId producer, std::uint32_t seq)
{
  if (!m_poll) {
    express(Name{producer, seq});
  }
}

void
NdnConsumer::express(const Name& name)
{
  if (m_poll) {
    m_prefixes[name.prefix].outstanding.insert(name.seq);
  }
  if (!m_fwd.expressInterest(Interest{name, m_config.lifetime, 0}) && m_poll) {
    m_prefixes[name.prefix].retry.push_back(name.seq);
  }
}

void
NdnConsumer::tick()
{
  bool more = false;
  for (auto& [producer, st] : m_prefixes) {
    std::uint32_t items = m_poll->itemsPerProducer.at(producer);
    if (!st.retry.empty()) {
      std::uint32_t seq = st.retry.front();
      st.retry.pop_front();
      express(Name{producer, seq});
    }
    else if (static_cast<int>(st.outstanding.size()) < m_config.lookahead && st.nextSeq < items) {
      express(Name{producer, st.nextSeq++});
    }
    more = more || st.nextSeq < items || !st.retry.empty();
  }
  SimTime next = m_app.sim().now() + m_poll->interval;
  if (more && next < m_poll->stop) {
    m_app.sim().scheduleAt(next, [this] { tick(); });
  }
}

HoppAgent::HoppAgent(NodeId id, Mac& mac, Forwarder& fwd, TreeState& tree, AppContext& app,
                     HoppConfig config, bool isProxy)
  : m_id(id)
  , m_sim(app.sim())
  , m_mac(mac)
  , m_fwd(fwd)
  , m_tree(tree)
  , m_app(app)
  , m_config(config)
  , m_isProxy(isProxy)
{
}

void
HoppAgent::attach()
{
  m_mac.setReceiver(m_id, FrameKind::Pa, [this] (const Frame& f) {
    m_sim.schedule(m_config.procDelay, [this, from = f.src, pa = std::get<NameAdvertisement>(f.packet)] {
      onPa(from, pa.name);
    });
  });
  m_fwd.onInterestSeen([this] (const Interest& i, NodeId) {
    // an Interest for an advertised name acknowledges the advertisement
    auto it = m_adverts.find(i.name);
    if (it != m_adverts.end()) {
      m_sim.cancel(it->second.timer);
      m_adverts.erase(it);
      m_fwd.cs().unpin(i.name);
    }
  });
  m_fwd.onAppData([this] (const Data& d) { onFetched(d); });
  m_fwd.onAppExpire([this] (const Interest& i) {
    m_app.event(m_id, "refetch", i.name.item());
    fetch(i.name);
  });
  m_fwd.onLinkOutcome([this] (NodeId neighbor, bool ok) {
    m_tree.recordLinkOutcome(m_id, neighbor, ok);
  });
}

void
HoppAgent::publish(std::uint32_t seq)
{
  Name name{m_id, seq};
  m_app.publish(m_id, name.item());
  m_fwd.putData(Data{name, m_app.payloadBytes(), false}, true);
  advertise(name);
}

void
HoppAgent::advertise(const Name& name)
{
  Advert& a = m_adverts[name];
  a.retx = 0;
  sendPa(name);
  a.timer = m_sim.schedule(m_config.retxInterval, [this, name] { onPaTimer(name); });
}

void
HoppAgent::sendPa(const Name& name)
{
  const NdnConfig& nc = m_fwd.config();
  Frame f;
  f.src = m_id;
  f.dst = m_tree.parent(m_id);
  f.kind = FrameKind::Pa;
  f.label = "pa";
  f.bytes = nc.macHeaderBytes + nc.sizing.interestBytes();
  f.item = name.item();
  f.packet = NameAdvertisement{name, m_id};
  NodeId parent = f.dst;
  m_mac.unicast(std::move(f), [this, parent] (const MacOutcome& o) {
    m_tree.recordLinkOutcome(m_id, parent, o.delivered);
  });
}

void
HoppAgent::onPaTimer(const Name& name)
{
  auto it = m_adverts.find(name);
  if (it == m_adverts.end()) {
    return;
  }
  Advert& a = it->second;
  if (a.retx < m_config.maxRetx) {
    ++a.retx;
    sendPa(name);
    a.timer = m_sim.schedule(m_config.retxInterval, [this, name] { onPaTimer(name); });
    return;
  }
  ++a.exhausted;
  m_app.event(m_id, "pa-exhausted", name.item());
  if (a.exhausted % m_config.switchThreshold == 0) {
    switchUplink();
  }
  int exhausted = a.exhausted;
  advertise(name);
  m_adverts[name].exhausted = exhausted;
}

void
HoppAgent::switchUplink()
{
  auto alt = m_tree.bestAlternative(m_id);
  if (!alt) {
    return;
  }
  m_tree.switchParent(m_id, *alt);
  m_fwd.fib()[kDefaultPrefix] = *alt;
  ++m_switches;
  m_app.event(m_id, "uplink-switch");
  // pending advertisements follow the new parent on their next attempt
}

void
HoppAgent::onPa(NodeId from, const Name& name)
{
  if (m_fwd.pit().find(name) != nullptr) {
    return;
  }
  m_fetchFrom[name] = from;
  fetch(name);
}

void
HoppAgent::fetch(const Name& name)
{
  auto it = m_fetchFrom.find(name);
  if (it == m_fetchFrom.end()) {
    return;
  }
  if (!m_fwd.expressInterestVia(Interest{name, m_config.lifetime, 0}, it->second)) {
    // PIT full: try again later
    m_sim.schedule(m_config.retxInterval, [this, name] {
      if (m_fwd.pit().find(name) == nullptr) {
        fetch(name);
      }
    });
  }
}

void
HoppAgent::onFetched(const Data& data)
{
  if (m_fetchFrom.erase(data.name) == 0) {
    return;
  }
  if (m_isProxy) {
    m_app.deliver(m_id, data.name.item());
    return;
  }
  m_fwd.cs().insert(data.name, data.payloadLen, true);
  advertise(data.name);
}

void
InotProducer::publish(std::uint32_t seq)
{
  Name name{m_fwd.id(), seq};
  m_app.publish(m_fwd.id(), name.item());
  m_fwd.expressInterest(Interest{name, m_lifetime, m_app.payloadBytes()});
}

InotSink::InotSink(Forwarder& fwd, AppContext& app)
  : m_fwd(fwd)
  , m_app(app)
{
  m_fwd.onAppInterest([this] (const Interest& i, NodeId) { onNotification(i); });
}

void
InotSink::onNotification(const Interest& interest)
{
  if (!interest.isNotification()) {
    return;
  }
  auto& window = m_seen[interest.name.prefix];
  if (std::find(window.begin(), window.end(), interest.name.seq) == window.end()) {
    window.push_back(interest.name.seq);
    if (window.size() > kDedupWindow) {
      window.pop_front();
    }
    m_app.deliver(m_fwd.id(), interest.name.item());
  }
  m_fwd.putData(Data{interest.name, 0, true});
}

} // namespace iotsim
