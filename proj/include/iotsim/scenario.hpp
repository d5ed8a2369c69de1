#pragma once

#include "iotsim/coap.hpp"
#include "iotsim/icn_variants.hpp"
#include "iotsim/mqttsn.hpp"
#include "iotsim/ndn.hpp"
#include "iotsim/phy_mac.hpp"
#include "iotsim/topology.hpp"
#include "iotsim/trace.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace iotsim {

enum class Protocol {
  Ndn,
  Hopp,
  Inot,
  CoapPutN,
  CoapPutC,
  CoapGetN,
  CoapGetC,
  CoapObs,
  MqttQ0,
  MqttQ1,
};

inline constexpr Protocol kAllProtocols[] = {
  Protocol::Ndn,      Protocol::Hopp,     Protocol::Inot,    Protocol::CoapPutN, Protocol::CoapPutC,
  Protocol::CoapGetN, Protocol::CoapGetC, Protocol::CoapObs, Protocol::MqttQ0,   Protocol::MqttQ1,
};

std::string_view
toString(Protocol p);

Protocol
protocolFromString(std::string_view s);

bool
isPull(Protocol p);

/// Raised for configurations rejected before a run starts.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct TopologySpec
{
  enum class Kind { SingleHop, Chain, Tree };
  Kind kind = Kind::SingleHop;
  /// Link delivery probability for single-hop and chain.
  double p = 0.99;
  int hops = 1;
  TreeSpec tree;
  FadingConfig fading;
};

struct ScheduleSpec
{
  enum class Mode { Periodic, Uniform };
  Mode mode = Mode::Periodic;
  Duration interval = std::chrono::seconds(5);
  double jitter = 0.0;
  Duration lo = std::chrono::seconds(1);
  Duration hi = std::chrono::seconds(3);
  std::uint32_t itemsPerNode = 100;
  /// Per-node phase offset drawn in [0, interval) ("uncoordinated" publishers).
  bool randomPhase = false;
};

/// Publish instants relative to traffic start: each gap is the interval
/// scaled by (1 +- jitter), or drawn from U(lo, hi).
std::vector<SimTime>
makePublishTimes(const ScheduleSpec& spec, Duration offset, Rng& rng);

enum class PullMode { Scheduled, Unscheduled };

struct TimerConfig
{
  Duration retxInterval = std::chrono::seconds(2);
  int maxRetx = 4;
  Duration interestLifetime = std::chrono::seconds(10);
};

struct SizingConfig
{
  std::uint32_t payloadBytes = 48;
  std::uint32_t macHeaderBytes = 23;
  std::uint32_t ipUdpBytes = 12;
  std::uint32_t beaconBytes = 20;
  NdnSizing ndn;
};

struct NdnSettings
{
  std::size_t pitCapacity = 16;
  std::size_t sinkPitCapacity = 256;
  PitPolicy pitPolicy = PitPolicy::DropNew;
  std::uint32_t csBytes = 10240;
  int consumerLookahead = 3;
  int consumerReexpress = 1;
  RetxTrigger retxTrigger = RetxTrigger::Timer;
};

/// Power draw per radio state, in mW.
struct EnergyConfig
{
  double txMw = 42.0;
  double rxMw = 36.9;
  double idleMw = 0.00006;
  Duration window = std::chrono::seconds(10);
};

/// Scripted change of a link's delivery probability (both directions).
struct LinkFault
{
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  SimTime at{0};
  double p = 0.0;
};

struct ScenarioConfig
{
  std::string name = "scenario";
  Protocol protocol = Protocol::Ndn;
  TopologySpec topology;
  ScheduleSpec schedule;
  Duration pollInterval = std::chrono::seconds(1);
  PullMode pull = PullMode::Scheduled;
  Duration warmup = std::chrono::seconds(30);
  Duration drain = std::chrono::seconds(20);
  std::uint64_t seed = 1;
  int repetitions = 1;
  TimerConfig timers;
  SizingConfig sizing;
  MacConfig mac;
  EnergyConfig energy;
  Duration goodputWindow = std::chrono::seconds(10);
  /// Per-hop processing delay, applied on receive.
  Duration procDelay{1500};
  /// Zero disables beaconing.
  Duration beaconInterval = std::chrono::seconds(10);
  CoapConfig coap;
  MqttSnConfig mqtt;
  NdnSettings ndn;
  HoppConfig hopp;
  std::vector<LinkFault> faults;

  /// Throws ConfigError on inconsistent settings.
  void
  validate() const;
};

ScenarioConfig
scenarioFromJson(const std::string& text);

ScenarioConfig
loadScenario(const std::string& path);

std::string
scenarioToJson(const ScenarioConfig& config);

/// Everything a finished run leaves behind.
struct RunResult
{
  ScenarioConfig config;
  Topology topology;
  /// Tree at the end of the run (HoPP may have switched uplinks).
  TreeState tree;
  std::vector<int> initialRanks;
  std::vector<NodeId> initialParents;
  TraceLog trace;
  SimTime trafficStart{0};
  SimTime lastPublish{0};
  SimTime runEnd{0};
  int uplinkSwitches = 0;
};

RunResult
runExperiment(const ScenarioConfig& config);

} // namespace iotsim
