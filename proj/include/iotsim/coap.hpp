#pragma once

#include "iotsim/app.hpp"
#include "iotsim/ip.hpp"
#include "iotsim/protocol.hpp"

#include <deque>
#include <functional>
#include <map>
#include <optional>

namespace iotsim {

struct CoapConfig
{
  Duration retxInterval = std::chrono::seconds(2);
  int maxRetx = 4;
  /// Outstanding CONs per peer; further CONs wait in a bounded queue.
  std::size_t nstart = 1;
  std::size_t queueLimit = 1;
  std::uint32_t baseBytes = 4;
  std::uint32_t tokenBytes = 2;
  std::uint32_t uriBytes = 10;
  std::uint32_t observeBytes = 3;
  std::size_t dedupWindow = 16;
};

/// CoAP message layer on one endpoint: CON retransmission at a fixed period,
/// duplicate detection for CON requests, NSTART limiting per peer.
class CoapEndpoint
{
public:
  /// acked is false on timeout or queue overflow.
  using ResponseHandler = std::function<void(bool acked, const CoapMessage* response)>;
  /// Produces the response to a request (piggybacked on the ACK for CON).
  using RequestHandler = std::function<CoapMessage(NodeId peer, const CoapMessage& request)>;
  using MessageHandler = std::function<void(NodeId peer, const CoapMessage& message)>;

  CoapEndpoint(NodeId id, IpPlane& ip, AppContext& app, CoapConfig config);

  NodeId
  id() const
  {
    return m_id;
  }

  void
  onRequest(RequestHandler h)
  {
    m_onRequest = std::move(h);
  }

  /// Non-confirmable responses and notifications.
  void
  onMessage(MessageHandler h)
  {
    m_onMessage = std::move(h);
  }

  void
  sendCon(NodeId peer, CoapMessage msg, ResponseHandler done);

  void
  sendNon(NodeId peer, CoapMessage msg);

  std::size_t
  outstanding(NodeId peer) const;

  std::uint16_t
  nextToken()
  {
    return m_nextToken++;
  }

private:
  struct Exchange
  {
    NodeId peer;
    CoapMessage msg;
    ResponseHandler done;
    int retx = 0;
    EventHandle timer;
  };
  struct Queued
  {
    CoapMessage msg;
    ResponseHandler done;
  };

  void
  start(NodeId peer, CoapMessage msg, ResponseHandler done);

  void
  transmit(NodeId peer, const CoapMessage& msg);

  void
  onTimer(std::uint16_t mid);

  void
  complete(std::uint16_t mid, bool acked, const CoapMessage* response);

  void
  receive(const IpPacket& packet);

  std::uint32_t
  headerBytes(const CoapMessage& msg) const;

  NodeId m_id;
  IpPlane& m_ip;
  AppContext& m_app;
  CoapConfig m_config;
  std::uint16_t m_nextMid = 1;
  std::uint16_t m_nextToken = 1;
  std::map<std::uint16_t, Exchange> m_exchanges;
  std::map<NodeId, std::deque<Queued>> m_queues;
  // recent CON requests per peer, with the response sent
  std::map<NodeId, std::deque<std::pair<std::uint16_t, CoapMessage>>> m_recent;
  RequestHandler m_onRequest;
  MessageHandler m_onMessage;
};

enum class CoapMode { PutNon, PutCon, GetNon, GetCon, Observe };

/// Producer-side CoAP application: pushes items (PUT), serves the latest
/// item (GET), or notifies registered observers.
class CoapProducer : public ProducerApp
{
public:
  CoapProducer(CoapEndpoint& ep, AppContext& app, CoapMode mode, NodeId sink);

  void
  publish(std::uint32_t seq) override;

private:
  CoapMessage
  serve(NodeId peer, const CoapMessage& request);

  CoapEndpoint& m_ep;
  AppContext& m_app;
  CoapMode m_mode;
  NodeId m_sink;
  std::optional<ItemId> m_latest;
  struct Observer
  {
    NodeId peer;
    std::uint16_t token;
  };
  std::vector<Observer> m_observers;
  std::uint32_t m_observeSeq = 0;
};

/// Sink-side CoAP application: resource server for PUTs, GET poller, or
/// observer.
class CoapSink : public SinkApp
{
public:
  CoapSink(CoapEndpoint& ep, AppContext& app, CoapMode mode, std::vector<NodeId> producers,
           std::optional<PollPlan> poll);

  void
  start() override;

  void
  afterPublish(NodeId producer, std::uint32_t seq) override;

private:
  void
  get(NodeId producer);

  void
  registerObserver(NodeId producer);

  void
  poll();

  void
  accept(const CoapMessage& msg);

  CoapEndpoint& m_ep;
  AppContext& m_app;
  CoapMode m_mode;
  std::vector<NodeId> m_producers;
  std::optional<PollPlan> m_poll;
};

std::string_view
toString(CoapMode mode);

} // namespace iotsim
