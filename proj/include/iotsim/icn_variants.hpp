#pragma once

#include "iotsim/app.hpp"
#include "iotsim/ndn.hpp"
#include "iotsim/protocol.hpp"
#include "iotsim/topology.hpp"

#include <deque>
#include <optional>
#include <set>

namespace iotsim {

/// Producer for NDN pull: publishing puts the item into the local CS, which
/// also answers any Interest already waiting for it.
class NdnProducer : public ProducerApp
{
public:
  NdnProducer(Forwarder& fwd, AppContext& app)
    : m_fwd(fwd)
    , m_app(app)
  {
  }

  void
  publish(std::uint32_t seq) override;

private:
  Forwarder& m_fwd;
  AppContext& m_app;
};

struct NdnConsumerConfig
{
  /// Unscheduled mode: names outstanding per prefix.
  int lookahead = 3;
  /// Application re-expressions of one name after PIT expiry.
  int maxReexpress = 1;
  Duration lifetime = std::chrono::seconds(10);
};

/// Sink-side NDN consumer. Scheduled mode requests each item when it is
/// published; unscheduled mode polls the next sequence numbers of every
/// prefix once per poll period.
class NdnConsumer : public SinkApp
{
public:
  NdnConsumer(Forwarder& fwd, AppContext& app, NdnConsumerConfig config,
              std::optional<PollPlan> poll);

  void
  start() override;

  void
  afterPublish(NodeId producer, std::uint32_t seq) override;

private:
  struct PrefixState
  {
    std::uint32_t nextSeq = 0;
    std::set<std::uint32_t> outstanding;
    std::deque<std::uint32_t> retry;
  };

  void
  express(const Name& name);

  void
  tick();

  Forwarder& m_fwd;
  AppContext& m_app;
  NdnConsumerConfig m_config;
  std::optional<PollPlan> m_poll;
  std::map<NodeId, PrefixState> m_prefixes;
  std::map<Name, int> m_reexpressed;
};

struct HoppConfig
{
  Duration retxInterval = std::chrono::seconds(2);
  int maxRetx = 4;
  Duration lifetime = std::chrono::seconds(10);
  /// Exhausted advertisement budgets before switching uplink.
  int switchThreshold = 1;
  Duration procDelay{1500};
};

/// HoPP on one node. Publishers and relays advertise names to their parent,
/// which fetches the item with an Interest and advertises it onward. The
/// content proxy (sink) keeps its topic table locally: every advertisement
/// it hears is fetched and handed to the application.
class HoppAgent : public ProducerApp, public SinkApp
{
public:
  HoppAgent(NodeId id, Mac& mac, Forwarder& fwd, TreeState& tree, AppContext& app,
            HoppConfig config, bool isProxy);

  void
  attach();

  void
  publish(std::uint32_t seq) override;

  void
  start() override
  {
  }

  int
  uplinkSwitches() const
  {
    return m_switches;
  }

private:
  struct Advert
  {
    int retx = 0;
    int exhausted = 0;
    EventHandle timer;
  };

  void
  advertise(const Name& name);

  void
  sendPa(const Name& name);

  void
  onPaTimer(const Name& name);

  void
  onPa(NodeId from, const Name& name);

  void
  fetch(const Name& name);

  void
  onFetched(const Data& data);

  void
  switchUplink();

  NodeId m_id;
  Simulator& m_sim;
  Mac& m_mac;
  Forwarder& m_fwd;
  TreeState& m_tree;
  AppContext& m_app;
  HoppConfig m_config;
  bool m_isProxy;
  std::map<Name, Advert> m_adverts;
  std::map<Name, NodeId> m_fetchFrom;
  int m_switches = 0;
};

/// Interest Notification publisher: the payload rides in an Interest sent
/// towards the sink, acknowledged hop by hop by an empty Data.
class InotProducer : public ProducerApp
{
public:
  InotProducer(Forwarder& fwd, AppContext& app, Duration lifetime)
    : m_fwd(fwd)
    , m_app(app)
    , m_lifetime(lifetime)
  {
  }

  void
  publish(std::uint32_t seq) override;

private:
  Forwarder& m_fwd;
  AppContext& m_app;
  Duration m_lifetime;
};

class InotSink : public SinkApp
{
public:
  static constexpr std::size_t kDedupWindow = 8;

  InotSink(Forwarder& fwd, AppContext& app);

private:
  void
  onNotification(const Interest& interest);

  Forwarder& m_fwd;
  AppContext& m_app;
  std::map<NodeId, std::deque<std::uint32_t>> m_seen;
};

} // namespace iotsim
