#pragma once

#include "iotsim/app.hpp"
#include "iotsim/ip.hpp"
#include "iotsim/protocol.hpp"

#include <deque>
#include <map>
#include <set>

namespace iotsim {

struct MqttSnConfig
{
  Duration retxInterval = std::chrono::seconds(2);
  int maxRetx = 4;
  std::size_t dedupWindow = 16;
  /// Clients start their bootstrap uniformly within this span.
  Duration bootstrapSpread = std::chrono::seconds(5);
  std::uint32_t publishHeaderBytes = 7;
  std::uint32_t pubackBytes = 7;
  std::uint32_t connectBytes = 14;
  std::uint32_t connackBytes = 3;
  std::uint32_t registerBytes = 16;
  std::uint32_t regackBytes = 7;
};

/// Sizes and labels of MQTT-SN messages.
SendInfo
mqttSendInfo(const MqttSnMessage& msg, const MqttSnConfig& config);

/// Publishing client on a producer node.
class MqttSnClient : public ProducerApp
{
public:
  enum class State { Disconnected, Connecting, Registering, Active };

  MqttSnClient(NodeId id, NodeId broker, IpPlane& ip, AppContext& app, MqttSnConfig config,
               std::uint8_t qos, Rng rng);

  void
  start() override;

  void
  publish(std::uint32_t seq) override;

  State
  state() const
  {
    return m_state;
  }

  std::uint16_t
  topicId() const
  {
    return m_topicId;
  }

private:
  struct Pending
  {
    MqttSnMessage msg;
    int retx = 0;
    EventHandle timer;
  };

  void
  connect();

  void
  sendTracked(const MqttSnMessage& msg);

  void
  onTimer(std::uint16_t key);

  void
  receive(const IpPacket& packet);

  void
  send(const MqttSnMessage& msg);

  NodeId m_id;
  NodeId m_broker;
  IpPlane& m_ip;
  AppContext& m_app;
  MqttSnConfig m_config;
  std::uint8_t m_qos;
  Rng m_rng;
  State m_state = State::Disconnected;
  std::uint16_t m_topicId = 0;
  std::uint16_t m_nextMsgId = 1;
  // keyed by msg_id; CONNECT uses key 0
  std::map<std::uint16_t, Pending> m_pending;
};

/// Broker on the sink: sessions, topic registry, duplicate detection.
class MqttSnBroker : public SinkApp
{
public:
  MqttSnBroker(NodeId id, IpPlane& ip, AppContext& app, MqttSnConfig config);

  std::size_t
  topicCount() const
  {
    return m_topics.size();
  }

private:
  void
  receive(const IpPacket& packet);

  void
  send(NodeId client, const MqttSnMessage& msg);

  NodeId m_id;
  IpPlane& m_ip;
  AppContext& m_app;
  MqttSnConfig m_config;
  std::set<NodeId> m_sessions;
  // topic name is the producer prefix
  std::map<NodeId, std::uint16_t> m_topics;
  std::map<std::uint16_t, NodeId> m_topicNames;
  std::map<NodeId, std::deque<std::uint16_t>> m_seen;
};

} // namespace iotsim
