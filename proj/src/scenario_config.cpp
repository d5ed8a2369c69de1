#include "iotsim/scenario.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace iotsim {

using json = nlohmann::ordered_json;

namespace {

constexpr std::pair<Protocol, std::string_view> kProtocolNames[] = {
  {Protocol::Ndn, "ndn"},
  {Protocol::Hopp, "hopp"},
  {Protocol::Inot, "inot"},
  {Protocol::CoapPutN, "coap-put-n"},
  {Protocol::CoapPutC, "coap-put-c"},
  {Protocol::CoapGetN, "coap-get-n"},
  {Protocol::CoapGetC, "coap-get-c"},
  {Protocol::CoapObs, "coap-obs"},
  {Protocol::MqttQ0, "mqtt-q0"},
  {Protocol::MqttQ1, "mqtt-q1"},
};

void
checkKeys(const json& obj, const std::string& where, std::set<std::string> allowed)
{
  if (!obj.is_object()) {
    throw ConfigError(where + ": expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template<typename T>
void
read(const json& obj, const char* key, T& out)
{
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->template get<T>();
    }
    catch (const json::exception&) {
      throw ConfigError(std::string("bad value for '") + key + "'");
    }
  }
}

void
readSeconds(const json& obj, const char* key, Duration& out)
{
  double s = toSeconds(out);
  read(obj, key, s);
  out = fromSeconds(s);
}

void
readMicros(const json& obj, const char* key, Duration& out)
{
  std::int64_t us = out.count();
  read(obj, key, us);
  out = Duration(us);
}

void
readPair(const json& obj, const char* key, double& a, double& b)
{
  if (auto it = obj.find(key); it != obj.end()) {
    if (!it->is_array() || it->size() != 2) {
      throw ConfigError(std::string("'") + key + "' must be a two-element array");
    }
    a = (*it)[0].get<double>();
    b = (*it)[1].get<double>();
  }
}

} // namespace

std::string_view
toString(Protocol p)
{
  for (const auto& [proto, name] : kProtocolNames) {
    if (proto == p) {
      return name;
    }
  }
  return "?";
}

Protocol
protocolFromString(std::string_view s)
{
  for (const auto& [proto, name] : kProtocolNames) {
    if (name == s) {
      return proto;
    }
  }
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

bool
isPull(Protocol p)
{
  return p == Protocol::Ndn || p == Protocol::CoapGetN || p == Protocol::CoapGetC;
}

void
ScenarioConfig::validate() const
{
  auto fail = [] (const std::string& msg) { throw ConfigError(msg); };
  if (topology.kind != TopologySpec::Kind::Tree && (topology.p < 0.0 || topology.p > 1.0)) {
    fail("topology.p outside [0, 1]");
  }
  if (topology.kind == TopologySpec::Kind::Chain && topology.hops < 1) {
    fail("chain needs at least one hop");
  }
  if (topology.kind == TopologySpec::Kind::Tree) {
    const TreeSpec& t = topology.tree;
    if (t.nodes < 1 || t.depthMin < 1 || t.depthMax < t.depthMin) {
      fail("invalid tree size or depth range");
    }
    if (t.pLo > t.pHi || t.pLo < 0.0 || t.pHi > 1.0) {
      fail("invalid p_range");
    }
    if (t.radius <= 0.0) {
      fail("radius must be positive");
    }
  }
  if (schedule.mode == ScheduleSpec::Mode::Periodic && schedule.interval <= Duration::zero()) {
    fail("periodic interval must be positive");
  }
  if (schedule.mode == ScheduleSpec::Mode::Uniform && !(schedule.lo < schedule.hi)) {
    fail("uniform schedule requires lo < hi");
  }
  if (schedule.jitter < 0.0 || schedule.jitter >= 1.0) {
    fail("jitter must be in [0, 1)");
  }
  if (schedule.itemsPerNode == 0) {
    fail("items_per_node must be positive");
  }
  if (pollInterval <= Duration::zero()) {
    fail("poll interval must be positive");
  }
  if (warmup < Duration::zero() || drain < Duration::zero()) {
    fail("warmup and drain must be non-negative");
  }
  if (repetitions < 1) {
    fail("repetitions must be at least 1");
  }
  if (timers.retxInterval <= Duration::zero() || timers.maxRetx < 0 ||
      timers.interestLifetime <= Duration::zero()) {
    fail("invalid timer block");
  }
  if (energy.window <= Duration::zero() || goodputWindow <= Duration::zero()) {
    fail("metric windows must be positive");
  }
  if (energy.txMw <= 0 || energy.rxMw <= 0 || energy.idleMw <= 0) {
    fail("power levels must be positive");
  }
  if (ndn.pitCapacity == 0 || ndn.sinkPitCapacity == 0 || coap.nstart == 0) {
    fail("PIT capacity and NSTART must be positive");
  }
  if (mac.maxFrameRetries < 0 || mac.backoffMax < mac.backoffMin) {
    fail("invalid MAC block");
  }
  if (hopp.switchThreshold < 1) {
    fail("hopp.switch_threshold must be at least 1");
  }
  for (const LinkFault& f : faults) {
    if (f.p < 0.0 || f.p > 1.0 || f.at < SimTime{0} || f.a == f.b) {
      fail("invalid link fault");
    }
  }
  std::uint32_t largest = sizing.macHeaderBytes +
                          std::max({sizing.ndn.dataBytes(sizing.payloadBytes),
                                    sizing.ndn.interestBytes(sizing.payloadBytes),
                                    sizing.ipUdpBytes + coap.baseBytes + coap.tokenBytes +
                                      coap.uriBytes + coap.observeBytes + sizing.payloadBytes});
  if (largest > kMaxFrameBytes) {
    fail("payload of " + std::to_string(sizing.payloadBytes) + " B does not fit a 127 B frame");
  }
}

ScenarioConfig
scenarioFromJson(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  }
  catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  checkKeys(j, "scenario",
            {"name", "protocol", "topology", "schedule", "poll_interval_s", "pull", "warmup_s",
             "drain_s", "seed", "repetitions", "timers", "sizing", "mac", "energy", "metrics",
             "beacon_interval_s", "proc_delay_us", "coap", "mqtt", "ndn", "hopp", "faults"});
  ScenarioConfig c;
  read(j, "name", c.name);
  if (j.contains("protocol")) {
    c.protocol = protocolFromString(j["protocol"].get<std::string>());
  }
  if (j.contains("topology")) {
    const json& t = j["topology"];
    checkKeys(t, "topology", {"kind", "p", "hops", "nodes", "depth", "p_range", "radius", "fading"});
    std::string kind = t.value("kind", "single-hop");
    if (kind == "single-hop") {
      c.topology.kind = TopologySpec::Kind::SingleHop;
    }
    else if (kind == "chain") {
      c.topology.kind = TopologySpec::Kind::Chain;
    }
    else if (kind == "tree") {
      c.topology.kind = TopologySpec::Kind::Tree;
    }
    else {
      throw ConfigError("unknown topology kind '" + kind + "'");
    }
    read(t, "p", c.topology.p);
    read(t, "hops", c.topology.hops);
    read(t, "nodes", c.topology.tree.nodes);
    double dmin = c.topology.tree.depthMin;
    double dmax = c.topology.tree.depthMax;
    readPair(t, "depth", dmin, dmax);
    c.topology.tree.depthMin = static_cast<int>(dmin);
    c.topology.tree.depthMax = static_cast<int>(dmax);
    readPair(t, "p_range", c.topology.tree.pLo, c.topology.tree.pHi);
    read(t, "radius", c.topology.tree.radius);
    if (t.contains("fading")) {
      const json& f = t["fading"];
      checkKeys(f, "topology.fading", {"enabled", "bad_p", "mean_good_s", "mean_bad_s"});
      read(f, "enabled", c.topology.fading.enabled);
      read(f, "bad_p", c.topology.fading.badDeliveryProb);
      readSeconds(f, "mean_good_s", c.topology.fading.meanGood);
      readSeconds(f, "mean_bad_s", c.topology.fading.meanBad);
    }
  }
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    checkKeys(s, "schedule", {"mode", "interval_s", "jitter", "lo_s", "hi_s", "items_per_node", "random_phase"});
    std::string mode = s.value("mode", "periodic");
    if (mode == "periodic") {
      c.schedule.mode = ScheduleSpec::Mode::Periodic;
    }
    else if (mode == "uniform") {
      c.schedule.mode = ScheduleSpec::Mode::Uniform;
    }
    else {
      throw ConfigError("unknown schedule mode '" + mode + "'");
    }
    readSeconds(s, "interval_s", c.schedule.interval);
    read(s, "jitter", c.schedule.jitter);
    readSeconds(s, "lo_s", c.schedule.lo);
    readSeconds(s, "hi_s", c.schedule.hi);
    read(s, "items_per_node", c.schedule.itemsPerNode);
    read(s, "random_phase", c.schedule.randomPhase);
  }
  readSeconds(j, "poll_interval_s", c.pollInterval);
  if (j.contains("pull")) {
    std::string pull = j["pull"].get<std::string>();
    if (pull == "scheduled") {
      c.pull = PullMode::Scheduled;
    }
    else if (pull == "unscheduled") {
      c.pull = PullMode::Unscheduled;
    }
    else {
      throw ConfigError("unknown pull mode '" + pull + "'");
    }
  }
  readSeconds(j, "warmup_s", c.warmup);
  readSeconds(j, "drain_s", c.drain);
  read(j, "seed", c.seed);
  read(j, "repetitions", c.repetitions);
  if (j.contains("timers")) {
    const json& t = j["timers"];
    checkKeys(t, "timers", {"retx_s", "max_retx", "interest_lifetime_s"});
    readSeconds(t, "retx_s", c.timers.retxInterval);
    read(t, "max_retx", c.timers.maxRetx);
    readSeconds(t, "interest_lifetime_s", c.timers.interestLifetime);
  }
  if (j.contains("sizing")) {
    const json& s = j["sizing"];
    checkKeys(s, "sizing", {"payload", "mac_header", "ip_udp", "beacon", "ndn_name", "ndn_seq",
                            "ndn_tlv", "ndn_data_extra"});
    read(s, "payload", c.sizing.payloadBytes);
    read(s, "mac_header", c.sizing.macHeaderBytes);
    read(s, "ip_udp", c.sizing.ipUdpBytes);
    read(s, "beacon", c.sizing.beaconBytes);
    read(s, "ndn_name", c.sizing.ndn.nameBytes);
    read(s, "ndn_seq", c.sizing.ndn.seqBytes);
    read(s, "ndn_tlv", c.sizing.ndn.tlvBytes);
    read(s, "ndn_data_extra", c.sizing.ndn.dataExtraBytes);
  }
  if (j.contains("mac")) {
    const json& m = j["mac"];
    checkKeys(m, "mac", {"max_frame_retries", "ack_timeout_us", "backoff_min_us", "backoff_max_us",
                         "turnaround_us", "ack_bytes"});
    read(m, "max_frame_retries", c.mac.maxFrameRetries);
    readMicros(m, "ack_timeout_us", c.mac.ackTimeout);
    readMicros(m, "backoff_min_us", c.mac.backoffMin);
    readMicros(m, "backoff_max_us", c.mac.backoffMax);
    readMicros(m, "turnaround_us", c.mac.turnaround);
    read(m, "ack_bytes", c.mac.ackBytes);
  }
  if (j.contains("energy")) {
    const json& e = j["energy"];
    checkKeys(e, "energy", {"tx_mw", "rx_mw", "idle_mw", "window_s"});
    read(e, "tx_mw", c.energy.txMw);
    read(e, "rx_mw", c.energy.rxMw);
    read(e, "idle_mw", c.energy.idleMw);
    readSeconds(e, "window_s", c.energy.window);
  }
  if (j.contains("metrics")) {
    checkKeys(j["metrics"], "metrics", {"goodput_window_s"});
    readSeconds(j["metrics"], "goodput_window_s", c.goodputWindow);
  }
  readSeconds(j, "beacon_interval_s", c.beaconInterval);
  readMicros(j, "proc_delay_us", c.procDelay);
  if (j.contains("coap")) {
    checkKeys(j["coap"], "coap", {"nstart", "queue_limit"});
    read(j["coap"], "nstart", c.coap.nstart);
    read(j["coap"], "queue_limit", c.coap.queueLimit);
  }
  if (j.contains("mqtt")) {
    checkKeys(j["mqtt"], "mqtt", {"dedup_window", "bootstrap_spread_s"});
    read(j["mqtt"], "dedup_window", c.mqtt.dedupWindow);
    readSeconds(j["mqtt"], "bootstrap_spread_s", c.mqtt.bootstrapSpread);
  }
  if (j.contains("ndn")) {
    const json& n = j["ndn"];
    checkKeys(n, "ndn", {"pit_capacity", "sink_pit_capacity", "pit_policy", "cs_bytes",
                         "consumer_lookahead", "consumer_reexpress", "retx_trigger"});
    read(n, "pit_capacity", c.ndn.pitCapacity);
    read(n, "sink_pit_capacity", c.ndn.sinkPitCapacity);
    if (n.contains("pit_policy")) {
      std::string policy = n["pit_policy"].get<std::string>();
      if (policy == "drop-new") {
        c.ndn.pitPolicy = PitPolicy::DropNew;
      }
      else if (policy == "overwrite-oldest") {
        c.ndn.pitPolicy = PitPolicy::OverwriteOldest;
      }
      else {
        throw ConfigError("unknown pit_policy '" + policy + "'");
      }
    }
    read(n, "cs_bytes", c.ndn.csBytes);
    read(n, "consumer_lookahead", c.ndn.consumerLookahead);
    read(n, "consumer_reexpress", c.ndn.consumerReexpress);
    if (n.contains("retx_trigger")) {
      std::string trig = n["retx_trigger"].get<std::string>();
      if (trig == "timer") {
        c.ndn.retxTrigger = RetxTrigger::Timer;
      }
      else if (trig == "mac-failure") {
        c.ndn.retxTrigger = RetxTrigger::MacFailure;
      }
      else {
        throw ConfigError("unknown retx_trigger '" + trig + "'");
      }
    }
  }
  if (j.contains("hopp")) {
    checkKeys(j["hopp"], "hopp", {"switch_threshold"});
    read(j["hopp"], "switch_threshold", c.hopp.switchThreshold);
  }
  if (j.contains("faults")) {
    if (!j["faults"].is_array()) {
      throw ConfigError("'faults' must be an array");
    }
    for (const json& f : j["faults"]) {
      checkKeys(f, "faults", {"a", "b", "at_s", "p"});
      LinkFault fault;
      read(f, "a", fault.a);
      read(f, "b", fault.b);
      Duration at{0};
      readSeconds(f, "at_s", at);
      fault.at = at;
      read(f, "p", fault.p);
      c.faults.push_back(fault);
    }
  }
  c.validate();
  return c;
}

ScenarioConfig
loadScenario(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scenario file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return scenarioFromJson(ss.str());
}

std::string
scenarioToJson(const ScenarioConfig& c)
{
  json j;
  j["name"] = c.name;
  j["protocol"] = toString(c.protocol);
  json t;
  switch (c.topology.kind) {
    case TopologySpec::Kind::SingleHop:
      t["kind"] = "single-hop";
      t["p"] = c.topology.p;
      break;
    case TopologySpec::Kind::Chain:
      t["kind"] = "chain";
      t["hops"] = c.topology.hops;
      t["p"] = c.topology.p;
      break;
    case TopologySpec::Kind::Tree:
      t["kind"] = "tree";
      t["nodes"] = c.topology.tree.nodes;
      t["depth"] = {c.topology.tree.depthMin, c.topology.tree.depthMax};
      t["p_range"] = {c.topology.tree.pLo, c.topology.tree.pHi};
      t["radius"] = c.topology.tree.radius;
      break;
  }
  t["fading"] = {{"enabled", c.topology.fading.enabled},
                 {"bad_p", c.topology.fading.badDeliveryProb},
                 {"mean_good_s", toSeconds(c.topology.fading.meanGood)},
                 {"mean_bad_s", toSeconds(c.topology.fading.meanBad)}};
  j["topology"] = t;
  json s;
  if (c.schedule.mode == ScheduleSpec::Mode::Periodic) {
    s["mode"] = "periodic";
    s["interval_s"] = toSeconds(c.schedule.interval);
    s["jitter"] = c.schedule.jitter;
  }
  else {
    s["mode"] = "uniform";
    s["lo_s"] = toSeconds(c.schedule.lo);
    s["hi_s"] = toSeconds(c.schedule.hi);
  }
  s["items_per_node"] = c.schedule.itemsPerNode;
  s["random_phase"] = c.schedule.randomPhase;
  j["schedule"] = s;
  j["poll_interval_s"] = toSeconds(c.pollInterval);
  j["pull"] = c.pull == PullMode::Scheduled ? "scheduled" : "unscheduled";
  j["warmup_s"] = toSeconds(c.warmup);
  j["drain_s"] = toSeconds(c.drain);
  j["seed"] = c.seed;
  j["repetitions"] = c.repetitions;
  j["timers"] = {{"retx_s", toSeconds(c.timers.retxInterval)},
                 {"max_retx", c.timers.maxRetx},
                 {"interest_lifetime_s", toSeconds(c.timers.interestLifetime)}};
  j["sizing"] = {{"payload", c.sizing.payloadBytes},       {"mac_header", c.sizing.macHeaderBytes},
                 {"ip_udp", c.sizing.ipUdpBytes},          {"beacon", c.sizing.beaconBytes},
                 {"ndn_name", c.sizing.ndn.nameBytes},     {"ndn_seq", c.sizing.ndn.seqBytes},
                 {"ndn_tlv", c.sizing.ndn.tlvBytes},       {"ndn_data_extra", c.sizing.ndn.dataExtraBytes}};
  j["mac"] = {{"max_frame_retries", c.mac.maxFrameRetries},
              {"ack_timeout_us", c.mac.ackTimeout.count()},
              {"backoff_min_us", c.mac.backoffMin.count()},
              {"backoff_max_us", c.mac.backoffMax.count()},
              {"turnaround_us", c.mac.turnaround.count()},
              {"ack_bytes", c.mac.ackBytes}};
  j["energy"] = {{"tx_mw", c.energy.txMw},
                 {"rx_mw", c.energy.rxMw},
                 {"idle_mw", c.energy.idleMw},
                 {"window_s", toSeconds(c.energy.window)}};
  j["metrics"] = {{"goodput_window_s", toSeconds(c.goodputWindow)}};
  j["beacon_interval_s"] = toSeconds(c.beaconInterval);
  j["proc_delay_us"] = c.procDelay.count();
  j["coap"] = {{"nstart", c.coap.nstart}, {"queue_limit", c.coap.queueLimit}};
  j["mqtt"] = {{"dedup_window", c.mqtt.dedupWindow},
               {"bootstrap_spread_s", toSeconds(c.mqtt.bootstrapSpread)}};
  j["ndn"] = {{"pit_capacity", c.ndn.pitCapacity},
              {"sink_pit_capacity", c.ndn.sinkPitCapacity},
              {"pit_policy", c.ndn.pitPolicy == PitPolicy::DropNew ? "drop-new" : "overwrite-oldest"},
              {"cs_bytes", c.ndn.csBytes},
              {"consumer_lookahead", c.ndn.consumerLookahead},
              {"consumer_reexpress", c.ndn.consumerReexpress},
              {"retx_trigger", c.ndn.retxTrigger == RetxTrigger::Timer ? "timer" : "mac-failure"}};
  j["hopp"] = {{"switch_threshold", c.hopp.switchThreshold}};
  if (!c.faults.empty()) {
    json faults = json::array();
    for (const LinkFault& f : c.faults) {
      faults.push_back({{"a", f.a}, {"b", f.b}, {"at_s", toSeconds(f.at - SimTime{0})}, {"p", f.p}});
    }
    j["faults"] = faults;
  }
  return j.dump(2);
}

} // namespace iotsim
