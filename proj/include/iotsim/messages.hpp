#pragma once

#include "iotsim/types.hpp"

#include <optional>
#include <variant>

namespace iotsim {

/// ICN content name: producer prefix /p<i> plus a per-producer counter.
struct Name
{
  NodeId prefix = kNoNode;
  std::uint32_t seq = 0;

  auto operator<=>(const Name&) const = default;

  ItemId
  item() const
  {
    return {prefix, seq};
  }
};

struct Interest
{
  Name name;
  Duration lifetime{0};
  /// Application payload carried by an Interest Notification; zero otherwise.
  std::uint32_t payloadLen = 0;

  bool
  isNotification() const
  {
    return payloadLen > 0;
  }
};

struct Data
{
  Name name;
  std::uint32_t payloadLen = 0;
  /// Empty Data acknowledging an Interest Notification.
  bool notificationAck = false;
};

/// HoPP name advertisement, sent from a publisher towards the content proxy.
struct NameAdvertisement
{
  Name name;
  NodeId origin = kNoNode;
};

struct Beacon
{
  NodeId origin = kNoNode;
  int rank = 0;
};

enum class CoapType { Con, Non, Ack };
enum class CoapCode { Empty, Get, Put, Content, Changed };

struct CoapMessage
{
  CoapType type = CoapType::Non;
  CoapCode code = CoapCode::Empty;
  std::uint16_t mid = 0;
  std::uint16_t token = 0;
  /// Resource owner; resources are per producer.
  NodeId resource = kNoNode;
  std::optional<std::uint32_t> observe;
  /// Item carried in the payload, if any.
  std::optional<ItemId> item;
  std::uint32_t payloadLen = 0;
  bool hasUri = false;
};

enum class MqttSnType {
  Connect,
  Connack,
  Register,
  Regack,
  Publish,
  Puback,
  Subscribe,
  Suback,
};

struct MqttSnMessage
{
  MqttSnType type = MqttSnType::Publish;
  std::uint16_t topicId = 0;
  std::uint16_t msgId = 0;
  std::uint8_t qos = 0;
  bool dup = false;
  std::optional<ItemId> item;
  std::uint32_t payloadLen = 0;
};

/// UDP/IPv6 datagram between two endpoints, forwarded hop by hop.
struct IpPacket
{
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  std::variant<CoapMessage, MqttSnMessage> body;
};

struct MacAck
{
  std::uint64_t frame = 0;
};

using Packet = std::variant<std::monostate, Interest, Data, NameAdvertisement, Beacon, IpPacket, MacAck>;

} // namespace iotsim
