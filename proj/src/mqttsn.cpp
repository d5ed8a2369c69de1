#include "iotsim/mqttsn.hpp"

#include <algorithm>

namespace iotsim {

SendInfo
mqttSendInfo(const MqttSnMessage& msg, const MqttSnConfig& c)
{
  switch (msg.type) {
    case MqttSnType::Connect: return {"mqtt-connect", c.connectBytes, 0, {}};
    case MqttSnType::Connack: return {"mqtt-connack", c.connackBytes, 0, {}};
    case MqttSnType::Register: return {"mqtt-register", c.registerBytes, 0, {}};
    case MqttSnType::Regack: return {"mqtt-regack", c.regackBytes, 0, {}};
    case MqttSnType::Publish: return {"mqtt-publish", c.publishHeaderBytes, msg.payloadLen, msg.item};
    case MqttSnType::Puback: return {"mqtt-puback", c.pubackBytes, 0, msg.item};
    case MqttSnType::Subscribe: return {"mqtt-subscribe", c.registerBytes, 0, {}};
    case MqttSnType::Suback: return {"mqtt-suback", c.regackBytes, 0, {}};
  }
  return {"mqtt", 0, 0, {}};
}

MqttSnClient::MqttSnClient(NodeId id, NodeId broker, IpPlane& ip, AppContext& app,
                           MqttSnConfig config, std::uint8_t qos, Rng rng)
  : m_id(id)
  , m_broker(broker)
  , m_ip(ip)
  , m_app(app)
  , m_config(config)
  , m_qos(qos)
  , m_rng(std::move(rng))
{
  m_ip.setHandler(id, [this] (const IpPacket& p) { receive(p); });
}

void
MqttSnClient::start()
{
  Duration delay = m_rng.uniformDuration(Duration{0}, m_config.bootstrapSpread);
  m_app.sim().schedule(delay, [this] { connect(); });
}

void
MqttSnClient::connect()
{
  m_state = State::Connecting;
  MqttSnMessage msg;
  msg.type = MqttSnType::Connect;
  sendTracked(msg);
}

void
MqttSnClient::send(const MqttSnMessage& msg)
{
  m_ip.send(IpPacket{m_id, m_broker, msg}, mqttSendInfo(msg, m_config));
}

void
MqttSnClient::sendTracked(const MqttSnMessage& msg)
{
  std::uint16_t key = msg.msgId;
  send(msg);
  Pending p{msg, 0, {}};
  p.timer = m_app.sim().schedule(m_config.retxInterval, [this, key] { onTimer(key); });
  m_pending[key] = std::move(p);
}

void
MqttSnClient::onTimer(std::uint16_t key)
{
  auto it = m_pending.find(key);
  if (it == m_pending.end()) {
    return;
  }
  Pending& p = it->second;
  if (p.retx >= m_config.maxRetx) {
    MqttSnMessage msg = p.msg;
    m_pending.erase(it);
    TraceRecord r;
    r.t = m_app.sim().now();
    r.node = m_id;
    r.kind = TraceKind::L3Drop;
    r.label = "exchange-timeout";
    r.item = msg.item;
    r.dst = m_broker;
    r.attempt = static_cast<std::uint32_t>(m_config.maxRetx + 1);
    m_app.trace().add(std::move(r));
    if (msg.type != MqttSnType::Publish) {
      // bootstrap failed: start over
      connect();
    }
    return;
  }
  ++p.retx;
  if (p.msg.type == MqttSnType::Publish) {
    p.msg.dup = true;
  }
  send(p.msg);
  p.timer = m_app.sim().schedule(m_config.retxInterval, [this, key] { onTimer(key); });
}

void
MqttSnClient::publish(std::uint32_t seq)
{
  ItemId item{m_id, seq};
  m_app.publish(m_id, item);
  if (m_state != State::Active) {
    TraceRecord r;
    r.t = m_app.sim().now();
    r.node = m_id;
    r.kind = TraceKind::L3Drop;
    r.label = "not-active";
    r.item = item;
    m_app.trace().add(std::move(r));
    return;
  }
  MqttSnMessage msg;
  msg.type = MqttSnType::Publish;
  msg.topicId = m_topicId;
  msg.qos = m_qos;
  msg.item = item;
  msg.payloadLen = m_app.payloadBytes();
  if (m_qos == 0) {
    send(msg);
    return;
  }
  msg.msgId = m_nextMsgId++;
  if (m_nextMsgId == 0) {
    m_nextMsgId = 1;
  }
  sendTracked(msg);
}

void
MqttSnClient::receive(const IpPacket& packet)
{
  const auto& msg = std::get<MqttSnMessage>(packet.body);
  auto settle = [this] (std::uint16_t key, MqttSnType expect) {
    auto it = m_pending.find(key);
    if (it == m_pending.end() || it->second.msg.type != expect) {
      return false;
    }
    m_app.sim().cancel(it->second.timer);
    m_pending.erase(it);
    return true;
  };
  switch (msg.type) {
    case MqttSnType::Connack:
      if (m_state == State::Connecting && settle(0, MqttSnType::Connect)) {
        m_state = State::Registering;
        MqttSnMessage reg;
        reg.type = MqttSnType::Register;
        reg.msgId = m_nextMsgId++;
        sendTracked(reg);
      }
      break;
    case MqttSnType::Regack:
      if (m_state == State::Registering && settle(msg.msgId, MqttSnType::Register)) {
        m_topicId = msg.topicId;
        m_state = State::Active;
        m_app.event(m_id, "mqtt-active");
      }
      break;
    case MqttSnType::Puback:
      settle(msg.msgId, MqttSnType::Publish);
      break;
    default:
      break;
  }
}

MqttSnBroker::MqttSnBroker(NodeId id, IpPlane& ip, AppContext& app, MqttSnConfig config)
  : m_id(id)
  , m_ip(ip)
  , m_app(app)
  , m_config(config)
{
  m_ip.setHandler(id, [this] (const IpPacket& p) { receive(p); });
}

void
MqttSnBroker::send(NodeId client, const MqttSnMessage& msg)
{
  m_ip.send(IpPacket{m_id, client, msg}, mqttSendInfo(msg, m_config));
}

void
MqttSnBroker::receive(const IpPacket& packet)
{
  const auto& msg = std::get<MqttSnMessage>(packet.body);
  NodeId client = packet.src;
  switch (msg.type) {
    case MqttSnType::Connect: {
      m_sessions.insert(client);
      MqttSnMessage ack;
      ack.type = MqttSnType::Connack;
      send(client, ack);
      break;
    }
    case MqttSnType::Register: {
      auto [it, inserted] = m_topics.try_emplace(client, static_cast<std::uint16_t>(m_topics.size() + 1));
      if (inserted) {
        m_topicNames[it->second] = client;
      }
      MqttSnMessage ack;
      ack.type = MqttSnType::Regack;
      ack.msgId = msg.msgId;
      ack.topicId = it->second;
      send(client, ack);
      break;
    }
    case MqttSnType::Publish: {
      if (!m_topicNames.count(msg.topicId)) {
        TraceRecord r;
        r.t = m_app.sim().now();
        r.node = m_id;
        r.kind = TraceKind::L3Drop;
        r.label = "bad-topic";
        r.item = msg.item;
        r.src = client;
        m_app.trace().add(std::move(r));
        break;
      }
      bool fresh = true;
      if (msg.qos == 1) {
        auto& seen = m_seen[client];
        fresh = std::find(seen.begin(), seen.end(), msg.msgId) == seen.end();
        if (fresh) {
          seen.push_back(msg.msgId);
          if (seen.size() > m_config.dedupWindow) {
            seen.pop_front();
          }
        }
        MqttSnMessage ack;
        ack.type = MqttSnType::Puback;
        ack.msgId = msg.msgId;
        ack.topicId = msg.topicId;
        ack.item = msg.item;
        send(client, ack);
      }
      if (fresh && msg.item) {
        m_app.deliver(m_id, *msg.item);
      }
      break;
    }
    default:
      break;
  }
}

} // namespace iotsim
