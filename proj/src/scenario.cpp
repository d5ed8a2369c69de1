#include "iotsim/scenario.hpp"

#include "iotsim/app.hpp"
#include "iotsim/ip.hpp"

#include <algorithm>
#include <memory>

namespace iotsim {

std::vector<SimTime>
makePublishTimes(const ScheduleSpec& spec, Duration offset, Rng& rng)
{
  std::vector<SimTime> times;
  times.reserve(spec.itemsPerNode);
  SimTime t = offset;
  for (std::uint32_t k = 0; k < spec.itemsPerNode; ++k) {
    Duration gap;
    if (spec.mode == ScheduleSpec::Mode::Periodic) {
      double scale = spec.jitter > 0.0 ? rng.uniform(1.0 - spec.jitter, 1.0 + spec.jitter) : 1.0;
      gap = fromSeconds(toSeconds(spec.interval) * scale);
    }
    else {
      gap = rng.uniformDuration(spec.lo, spec.hi);
    }
    t += gap;
    times.push_back(t);
  }
  return times;
}

namespace {

RouteFamily
familyOf(Protocol p)
{
  switch (p) {
    case Protocol::Ndn: return RouteFamily::NdnPull;
    case Protocol::Hopp:
    case Protocol::Inot: return RouteFamily::NdnUp;
    default: return RouteFamily::Ip;
  }
}

CoapMode
coapModeOf(Protocol p)
{
  switch (p) {
    case Protocol::CoapPutN: return CoapMode::PutNon;
    case Protocol::CoapPutC: return CoapMode::PutCon;
    case Protocol::CoapGetN: return CoapMode::GetNon;
    case Protocol::CoapGetC: return CoapMode::GetCon;
    default: return CoapMode::Observe;
  }
}

/// All objects of one run; members are destroyed in reverse order.
struct Network
{
  explicit Network(const ScenarioConfig& c)
    : config(c)
    , streams(c.seed)
  {
  }

  const ScenarioConfig& config;
  Simulator sim;
  RandomStreams streams;
  TraceLog trace;
  Topology topo;
  TreeState tree;
  std::unique_ptr<LinkModel> links;
  std::unique_ptr<Mac> mac;
  std::unique_ptr<BeaconService> beacons;
  std::unique_ptr<AppContext> app;
  std::vector<std::unique_ptr<Forwarder>> forwarders;
  std::unique_ptr<IpPlane> ip;
  std::vector<std::unique_ptr<CoapEndpoint>> coapEndpoints;
  std::vector<std::unique_ptr<HoppAgent>> hopp;
  std::vector<std::unique_ptr<ProducerApp>> ownedProducers;
  std::unique_ptr<SinkApp> ownedSink;
  std::map<NodeId, ProducerApp*> producers;
  SinkApp* sink = nullptr;

  void
  buildTopology();

  void
  buildProtocol(const std::map<NodeId, std::uint32_t>& items, SimTime trafficStart,
                SimTime lastPublish, SimTime runEnd);

  NdnConfig
  ndnConfig(NodeId node) const;
};

void
Network::buildTopology()
{
  const TopologySpec& spec = config.topology;
  switch (spec.kind) {
    case TopologySpec::Kind::SingleHop:
      topo = buildSingleHop(spec.p);
      tree = TreeState(topo);
      break;
    case TopologySpec::Kind::Chain:
      topo = buildChain(spec.hops, spec.p);
      tree = TreeState(topo);
      break;
    case TopologySpec::Kind::Tree: {
      auto [t, tr] = buildTree(spec.tree, streams);
      topo = std::move(t);
      tree = std::move(tr);
      break;
    }
  }
  links = std::make_unique<LinkModel>(streams, spec.fading);
  topo.applyTo(*links);
  MacConfig mc = config.mac;
  mc.headerBytes = config.sizing.macHeaderBytes;
  mac = std::make_unique<Mac>(sim, *links, streams, trace, mc, topo.size());
}

NdnConfig
Network::ndnConfig(NodeId node) const
{
  NdnConfig nc;
  nc.pitCapacity = node == topo.sink ? config.ndn.sinkPitCapacity : config.ndn.pitCapacity;
  nc.pitPolicy = config.ndn.pitPolicy;
  nc.csBytes = config.ndn.csBytes;
  nc.retxInterval = config.timers.retxInterval;
  nc.maxRetx = config.timers.maxRetx;
  nc.lifetime = config.timers.interestLifetime;
  nc.retxTrigger = config.ndn.retxTrigger;
  nc.procDelay = config.procDelay;
  nc.cacheData = config.protocol != Protocol::Inot;
  nc.macHeaderBytes = config.sizing.macHeaderBytes;
  nc.sizing = config.sizing.ndn;
  return nc;
}

void
Network::buildProtocol(const std::map<NodeId, std::uint32_t>& items, SimTime trafficStart,
                       SimTime lastPublish, SimTime runEnd)
{
  Protocol proto = config.protocol;
  app = std::make_unique<AppContext>(sim, trace, std::string(toString(proto)), config.sizing.payloadBytes);
  RouteTables routes = installRoutes(topo, tree, familyOf(proto));
  NodeId sinkId = topo.sink;
  std::vector<NodeId> producerIds = topo.producers();

  std::optional<PollPlan> poll;
  if (config.pull == PullMode::Unscheduled && isPull(proto)) {
    PollPlan plan;
    plan.interval = config.pollInterval;
    plan.itemsPerProducer = items;
    plan.start = trafficStart;
    // NDN keeps re-expressing until the end; GET stops once traffic is over
    plan.stop = proto == Protocol::Ndn ? runEnd - config.timers.interestLifetime
                                       : lastPublish + 2 * config.pollInterval;
    poll = plan;
  }

  if (familyOf(proto) != RouteFamily::Ip) {
    for (NodeId v = 0; v < static_cast<NodeId>(topo.size()); ++v) {
      auto fwd = std::make_unique<Forwarder>(v, sim, *mac, trace, ndnConfig(v));
      fwd->fib() = routes.ndn[v];
      fwd->attach();
      forwarders.push_back(std::move(fwd));
    }
    if (proto == Protocol::Ndn) {
      for (NodeId p : producerIds) {
        ownedProducers.push_back(std::make_unique<NdnProducer>(*forwarders[p], *app));
        producers[p] = ownedProducers.back().get();
      }
      NdnConsumerConfig cc;
      cc.lookahead = config.ndn.consumerLookahead;
      cc.maxReexpress = config.ndn.consumerReexpress;
      cc.lifetime = config.timers.interestLifetime;
      ownedSink = std::make_unique<NdnConsumer>(*forwarders[sinkId], *app, cc, poll);
      sink = ownedSink.get();
    }
    else if (proto == Protocol::Hopp) {
      HoppConfig hc = config.hopp;
      hc.retxInterval = config.timers.retxInterval;
      hc.maxRetx = config.timers.maxRetx;
      hc.lifetime = config.timers.interestLifetime;
      hc.procDelay = config.procDelay;
      for (NodeId v = 0; v < static_cast<NodeId>(topo.size()); ++v) {
        hopp.push_back(std::make_unique<HoppAgent>(v, *mac, *forwarders[v], tree, *app, hc, v == sinkId));
        hopp.back()->attach();
        if (v == sinkId) {
          sink = hopp.back().get();
        }
        else {
          producers[v] = hopp.back().get();
        }
      }
    }
    else {
      for (NodeId p : producerIds) {
        ownedProducers.push_back(
          std::make_unique<InotProducer>(*forwarders[p], *app, config.timers.interestLifetime));
        producers[p] = ownedProducers.back().get();
      }
      ownedSink = std::make_unique<InotSink>(*forwarders[sinkId], *app);
      sink = ownedSink.get();
    }
    return;
  }

  IpConfig ipc;
  ipc.macHeaderBytes = config.sizing.macHeaderBytes;
  ipc.ipUdpBytes = config.sizing.ipUdpBytes;
  ipc.procDelay = config.procDelay;
  ip = std::make_unique<IpPlane>(sim, *mac, trace, routes.ip, ipc);
  ip->attach();

  if (proto == Protocol::MqttQ0 || proto == Protocol::MqttQ1) {
    MqttSnConfig mc = config.mqtt;
    mc.retxInterval = config.timers.retxInterval;
    mc.maxRetx = config.timers.maxRetx;
    std::uint8_t qos = proto == Protocol::MqttQ1 ? 1 : 0;
    for (NodeId p : producerIds) {
      ownedProducers.push_back(
        std::make_unique<MqttSnClient>(p, sinkId, *ip, *app, mc, qos, streams.stream("mqtt", p)));
      producers[p] = ownedProducers.back().get();
    }
    ownedSink = std::make_unique<MqttSnBroker>(sinkId, *ip, *app, mc);
    sink = ownedSink.get();
    return;
  }

  CoapConfig cc = config.coap;
  cc.retxInterval = config.timers.retxInterval;
  cc.maxRetx = config.timers.maxRetx;
  CoapMode mode = coapModeOf(proto);
  coapEndpoints.resize(topo.size());
  for (NodeId v : producerIds) {
    coapEndpoints[v] = std::make_unique<CoapEndpoint>(v, *ip, *app, cc);
    ownedProducers.push_back(std::make_unique<CoapProducer>(*coapEndpoints[v], *app, mode, sinkId));
    producers[v] = ownedProducers.back().get();
  }
  coapEndpoints[sinkId] = std::make_unique<CoapEndpoint>(sinkId, *ip, *app, cc);
  ownedSink = std::make_unique<CoapSink>(*coapEndpoints[sinkId], *app, mode, producerIds, poll);
  sink = ownedSink.get();
}

} // namespace

RunResult
runExperiment(const ScenarioConfig& config)
{
  config.validate();
  Network net(config);
  net.buildTopology();

  RunResult result;
  result.config = config;
  result.topology = net.topo;
  for (NodeId v = 0; v < static_cast<NodeId>(net.topo.size()); ++v) {
    result.initialRanks.push_back(net.tree.rank(v));
    result.initialParents.push_back(net.tree.parent(v));
  }

  SimTime trafficStart = config.warmup;
  std::map<NodeId, std::vector<SimTime>> schedule;
  std::map<NodeId, std::uint32_t> items;
  SimTime lastPublish = trafficStart;
  for (NodeId p : net.topo.producers()) {
    Rng rng = net.streams.stream("schedule", p);
    Duration offset{0};
    if (config.schedule.randomPhase) {
      Duration span = config.schedule.mode == ScheduleSpec::Mode::Periodic ? config.schedule.interval
                                                                          : config.schedule.hi;
      offset = rng.uniformDuration(Duration{0}, span);
    }
    auto times = makePublishTimes(config.schedule, offset, rng);
    for (SimTime& t : times) {
      t += trafficStart;
    }
    lastPublish = std::max(lastPublish, times.back());
    items[p] = static_cast<std::uint32_t>(times.size());
    schedule[p] = std::move(times);
  }
  SimTime runEnd = lastPublish + config.drain;

  net.buildProtocol(items, trafficStart, lastPublish, runEnd);

  if (config.beaconInterval > Duration::zero()) {
    net.beacons = std::make_unique<BeaconService>(net.sim, *net.mac, net.tree, net.streams,
                                                  config.beaconInterval, config.sizing.beaconBytes);
    net.beacons->start(runEnd);
  }
  for (const LinkFault& f : config.faults) {
    if (!net.links->hasLink(f.a, f.b)) {
      throw ConfigError("fault on a link that does not exist");
    }
    net.sim.scheduleAt(f.at, [&net, f] { net.links->setSymmetric(f.a, f.b, f.p); });
  }
  for (auto& [id, producer] : net.producers) {
    producer->start();
  }
  net.sink->start();
  for (const auto& [p, times] : schedule) {
    for (std::uint32_t k = 0; k < times.size(); ++k) {
      net.sim.scheduleAt(times[k], [&net, p, k] {
        net.producers.at(p)->publish(k);
        net.sink->afterPublish(p, k);
      });
    }
  }

  net.sim.runUntil(runEnd);

  // exchanges still in flight at the end leave records stamped later
  TraceLog trace;
  for (const TraceRecord& r : net.trace.records()) {
    if (r.t <= runEnd) {
      trace.add(r);
    }
  }
  const RadioLog& radio = net.mac->radio();
  for (SimTime t{0};; t += config.energy.window) {
    SimTime at = std::min(t, runEnd);
    for (NodeId v = 0; v < static_cast<NodeId>(net.topo.size()); ++v) {
      TraceRecord r;
      r.t = at;
      r.node = v;
      r.kind = TraceKind::StateSample;
      r.label = "radio";
      r.radio = radio.totalsAt(v, at);
      trace.add(std::move(r));
    }
    if (at == runEnd) {
      break;
    }
  }
  trace.finalize();

  for (const auto& agent : net.hopp) {
    result.uplinkSwitches += agent->uplinkSwitches();
  }
  result.tree = net.tree;
  result.trace = std::move(trace);
  result.trafficStart = trafficStart;
  result.lastPublish = lastPublish;
  result.runEnd = runEnd;
  return result;
}

} // namespace iotsim
