#include "iotsim/coap.hpp"

#include <stdexcept>

namespace iotsim {

namespace {

std::string
labelOf(const CoapMessage& m)
{
  if (m.type == CoapType::Ack) {
    return "coap-ack";
  }
  switch (m.code) {
    case CoapCode::Put: return "coap-put";
    case CoapCode::Get: return "coap-get";
    case CoapCode::Content: return m.observe ? "coap-notify" : "coap-content";
    default: return "coap";
  }
}

} // namespace

std::string_view
toString(CoapMode mode)
{
  switch (mode) {
    case CoapMode::PutNon: return "coap-put-n";
    case CoapMode::PutCon: return "coap-put-c";
    case CoapMode::GetNon: return "coap-get-n";
    case CoapMode::GetCon: return "coap-get-c";
    case CoapMode::Observe: return "coap-obs";
  }
  return "?";
}

CoapEndpoint::CoapEndpoint(NodeId id, IpPlane& ip, AppContext& app, CoapConfig config)
  : m_id(id)
  , m_ip(ip)
  , m_app(app)
  , m_config(config)
{
  if (config.nstart == 0) {
    throw std::invalid_argument("NSTART must be positive");
  }
  m_ip.setHandler(id, [this] (const IpPacket& p) { receive(p); });
}

std::uint32_t
CoapEndpoint::headerBytes(const CoapMessage& msg) const
{
  std::uint32_t bytes = m_config.baseBytes + m_config.tokenBytes;
  if (msg.hasUri) {
    bytes += m_config.uriBytes;
  }
  if (msg.observe) {
    bytes += m_config.observeBytes;
  }
  return bytes;
}

std::size_t
CoapEndpoint::outstanding(NodeId peer) const
{
  std::size_t n = 0;
  for (const auto& [mid, ex] : m_exchanges) {
    n += ex.peer == peer ? 1 : 0;
  }
  return n;
}

void
CoapEndpoint::transmit(NodeId peer, const CoapMessage& msg)
{
  SendInfo info{labelOf(msg), headerBytes(msg), msg.payloadLen, msg.item};
  m_ip.send(IpPacket{m_id, peer, msg}, info);
}

void
CoapEndpoint::sendNon(NodeId peer, CoapMessage msg)
{
  msg.type = CoapType::Non;
  msg.mid = m_nextMid++;
  transmit(peer, msg);
}

void
CoapEndpoint::sendCon(NodeId peer, CoapMessage msg, ResponseHandler done)
{
  if (outstanding(peer) < m_config.nstart) {
    start(peer, std::move(msg), std::move(done));
    return;
  }
  auto& queue = m_queues[peer];
  if (queue.size() >= m_config.queueLimit) {
    TraceRecord r;
    r.t = m_app.sim().now();
    r.node = m_id;
    r.kind = TraceKind::L3Drop;
    r.label = "nstart-queue";
    r.item = msg.item;
    r.dst = peer;
    m_app.trace().add(std::move(r));
    if (done) {
      done(false, nullptr);
    }
    return;
  }
  queue.push_back({std::move(msg), std::move(done)});
}

void
CoapEndpoint::start(NodeId peer, CoapMessage msg, ResponseHandler done)
{
  msg.type = CoapType::Con;
  msg.mid = m_nextMid++;
  std::uint16_t mid = msg.mid;
  transmit(peer, msg);
  Exchange ex{peer, std::move(msg), std::move(done), 0, {}};
  ex.timer = m_app.sim().schedule(m_config.retxInterval, [this, mid] { onTimer(mid); });
  m_exchanges.emplace(mid, std::move(ex));
}

void
CoapEndpoint::onTimer(std::uint16_t mid)
{
  auto it = m_exchanges.find(mid);
  if (it == m_exchanges.end()) {
    return;
  }
  Exchange& ex = it->second;
  if (ex.retx >= m_config.maxRetx) {
    TraceRecord r;
    r.t = m_app.sim().now();
    r.node = m_id;
    r.kind = TraceKind::L3Drop;
    r.label = "exchange-timeout";
    r.item = ex.msg.item;
    r.dst = ex.peer;
    r.attempt = static_cast<std::uint32_t>(ex.retx + 1);
    m_app.trace().add(std::move(r));
    complete(mid, false, nullptr);
    return;
  }
  ++ex.retx;
  transmit(ex.peer, ex.msg);
  ex.timer = m_app.sim().schedule(m_config.retxInterval, [this, mid] { onTimer(mid); });
}

void
CoapEndpoint::complete(std::uint16_t mid, bool acked, const CoapMessage* response)
{
  auto it = m_exchanges.find(mid);
  Exchange ex = std::move(it->second);
  m_exchanges.erase(it);
  m_app.sim().cancel(ex.timer);
  if (ex.done) {
    ex.done(acked, response);
  }
  auto& queue = m_queues[ex.peer];
  if (!queue.empty() && outstanding(ex.peer) < m_config.nstart) {
    Queued next = std::move(queue.front());
    queue.pop_front();
    start(ex.peer, std::move(next.msg), std::move(next.done));
  }
}

void
CoapEndpoint::receive(const IpPacket& packet)
{
  const auto& msg = std::get<CoapMessage>(packet.body);
  NodeId peer = packet.src;
  switch (msg.type) {
    case CoapType::Ack: {
      auto it = m_exchanges.find(msg.mid);
      if (it != m_exchanges.end() && it->second.peer == peer) {
        complete(msg.mid, true, &msg);
      }
      break;
    }
    case CoapType::Con: {
      auto& recent = m_recent[peer];
      CoapMessage response;
      bool duplicate = false;
      for (const auto& [mid, resp] : recent) {
        if (mid == msg.mid) {
          response = resp;
          duplicate = true;
        }
      }
      // GET is safe to re-execute and is answered with fresh state
      if (!duplicate || msg.code == CoapCode::Get) {
        response = m_onRequest ? m_onRequest(peer, msg) : CoapMessage{};
        response.type = CoapType::Ack;
        response.mid = msg.mid;
        response.token = msg.token;
        response.hasUri = false;
        if (!duplicate) {
          recent.emplace_back(msg.mid, response);
          if (recent.size() > m_config.dedupWindow) {
            recent.pop_front();
          }
        }
      }
      transmit(peer, response);
      break;
    }
    case CoapType::Non:
      if (msg.code == CoapCode::Get || msg.code == CoapCode::Put) {
        CoapMessage response = m_onRequest ? m_onRequest(peer, msg) : CoapMessage{};
        if (msg.code == CoapCode::Get) {
          response.code = CoapCode::Content;
          response.token = msg.token;
          response.hasUri = false;
          sendNon(peer, response);
        }
      }
      else if (m_onMessage) {
        m_onMessage(peer, msg);
      }
      break;
  }
}

CoapProducer::CoapProducer(CoapEndpoint& ep, AppContext& app, CoapMode mode, NodeId sink)
  : m_ep(ep)
  , m_app(app)
  , m_mode(mode)
  , m_sink(sink)
{
  m_ep.onRequest([this] (NodeId peer, const CoapMessage& req) { return serve(peer, req); });
}

CoapMessage
CoapProducer::serve(NodeId peer, const CoapMessage& request)
{
  CoapMessage resp;
  resp.code = CoapCode::Content;
  if (request.code != CoapCode::Get) {
    resp.code = CoapCode::Changed;
    return resp;
  }
  if (request.observe) {
    bool known = false;
    for (const Observer& o : m_observers) {
      known = known || o.peer == peer;
    }
    if (!known) {
      m_observers.push_back({peer, request.token});
      m_app.event(m_ep.id(), "observe-register");
    }
    resp.observe = m_observeSeq;
  }
  resp.resource = m_ep.id();
  if (m_latest) {
    resp.item = m_latest;
    resp.payloadLen = m_app.payloadBytes();
  }
  return resp;
}

void
CoapProducer::publish(std::uint32_t seq)
{
  ItemId item{m_ep.id(), seq};
  m_app.publish(m_ep.id(), item);
  m_latest = item;
  CoapMessage msg;
  msg.resource = m_sink;
  msg.item = item;
  msg.payloadLen = m_app.payloadBytes();
  switch (m_mode) {
    case CoapMode::PutNon:
    case CoapMode::PutCon:
      msg.code = CoapCode::Put;
      msg.hasUri = true;
      msg.token = m_ep.nextToken();
      if (m_mode == CoapMode::PutNon) {
        m_ep.sendNon(m_sink, msg);
      }
      else {
        m_ep.sendCon(m_sink, msg, {});
      }
      break;
    case CoapMode::Observe:
      msg.code = CoapCode::Content;
      msg.resource = m_ep.id();
      msg.observe = ++m_observeSeq;
      for (const Observer& o : m_observers) {
        msg.token = o.token;
        m_ep.sendNon(o.peer, msg);
      }
      break;
    case CoapMode::GetNon:
    case CoapMode::GetCon:
      // served on request
      break;
  }
}

CoapSink::CoapSink(CoapEndpoint& ep, AppContext& app, CoapMode mode, std::vector<NodeId> producers,
                   std::optional<PollPlan> poll)
  : m_ep(ep)
  , m_app(app)
  , m_mode(mode)
  , m_producers(std::move(producers))
  , m_poll(std::move(poll))
{
  m_ep.onRequest([this] (NodeId, const CoapMessage& req) {
    if (req.code == CoapCode::Put) {
      accept(req);
    }
    CoapMessage resp;
    resp.code = CoapCode::Changed;
    return resp;
  });
  m_ep.onMessage([this] (NodeId, const CoapMessage& msg) { accept(msg); });
}

void
CoapSink::accept(const CoapMessage& msg)
{
  if (msg.item) {
    m_app.deliver(m_ep.id(), *msg.item);
  }
}

void
CoapSink::start()
{
  if (m_mode == CoapMode::Observe) {
    for (NodeId p : m_producers) {
      registerObserver(p);
    }
  }
  if (m_poll && (m_mode == CoapMode::GetNon || m_mode == CoapMode::GetCon)) {
    m_app.sim().scheduleAt(m_poll->start, [this] { poll(); });
  }
}

void
CoapSink::registerObserver(NodeId producer)
{
  CoapMessage msg;
  msg.code = CoapCode::Get;
  msg.hasUri = true;
  msg.observe = 0;
  msg.resource = producer;
  msg.token = m_ep.nextToken();
  m_ep.sendCon(producer, msg, [this, producer] (bool acked, const CoapMessage*) {
    if (!acked) {
      registerObserver(producer);
    }
  });
}

void
CoapSink::get(NodeId producer)
{
  CoapMessage msg;
  msg.code = CoapCode::Get;
  msg.hasUri = true;
  msg.resource = producer;
  msg.token = m_ep.nextToken();
  if (m_mode == CoapMode::GetNon) {
    m_ep.sendNon(producer, msg);
    return;
  }
  m_ep.sendCon(producer, msg, [this] (bool acked, const CoapMessage* resp) {
    if (acked && resp != nullptr) {
      accept(*resp);
    }
  });
}

void
CoapSink::afterPublish(NodeId producer, std::uint32_t)
{
  if (!m_poll && (m_mode == CoapMode::GetNon || m_mode == CoapMode::GetCon)) {
    get(producer);
  }
}

void
CoapSink::poll()
{
  for (NodeId p : m_producers) {
    get(p);
  }
  SimTime next = m_app.sim().now() + m_poll->interval;
  if (next < m_poll->stop) {
    m_app.sim().scheduleAt(next, [this] { poll(); });
  }
}

} // namespace iotsim
