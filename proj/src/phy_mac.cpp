#include "iotsim/phy_mac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iotsim {

std::string_view
toString(FrameKind kind)
{
  switch (kind) {
    case FrameKind::Interest: return "interest";
    case FrameKind::Data: return "data";
    case FrameKind::Pa: return "pa";
    case FrameKind::Coap: return "coap";
    case FrameKind::MqttSn: return "mqttsn";
    case FrameKind::Beacon: return "beacon";
    case FrameKind::MacAck: return "mac-ack";
  }
  return "?";
}

LinkModel::LinkModel(const RandomStreams& streams, FadingConfig fading, double bitRate,
                     std::uint32_t phyOverheadBytes)
  : m_streams(streams)
  , m_fading(fading)
  , m_bitRate(bitRate)
  , m_phyOverhead(phyOverheadBytes)
{
  if (bitRate <= 0) {
    throw std::invalid_argument("bit rate must be positive");
  }
}

void
LinkModel::setDeliveryProb(NodeId from, NodeId to, double p)
{
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("delivery probability outside [0, 1]");
  }
  auto [it, inserted] = m_prob.insert_or_assign({from, to}, p);
  if (inserted) {
    m_neighbors[from].push_back(to);
  }
}

bool
LinkModel::hasLink(NodeId from, NodeId to) const
{
  return m_prob.count({from, to}) > 0;
}

double
LinkModel::deliveryProb(NodeId from, NodeId to) const
{
  auto it = m_prob.find({from, to});
  return it == m_prob.end() ? 0.0 : it->second;
}

LinkModel::FadeState&
LinkModel::fadeState(NodeId a, NodeId b)
{
  auto key = std::minmax(a, b);
  auto it = m_fade.find(key);
  if (it == m_fade.end()) {
    FadeState st{false, SimTime{0}, m_streams.stream("fading", key.first, key.second)};
    double good = toSeconds(m_fading.meanGood);
    double bad = toSeconds(m_fading.meanBad);
    // start from the stationary distribution
    st.bad = st.rng.uniform() < bad / (good + bad);
    st.nextSwitch = fromSeconds(st.rng.exponential(st.bad ? bad : good));
    it = m_fade.emplace(key, std::move(st)).first;
  }
  return it->second;
}

bool
LinkModel::isFaded(NodeId a, NodeId b, SimTime t)
{
  if (!m_fading.enabled) {
    return false;
  }
  FadeState& st = fadeState(a, b);
  while (t >= st.nextSwitch) {
    st.bad = !st.bad;
    double mean = toSeconds(st.bad ? m_fading.meanBad : m_fading.meanGood);
    st.nextSwitch += std::max(Duration{1}, fromSeconds(st.rng.exponential(mean)));
  }
  return st.bad;
}

double
LinkModel::deliveryProbAt(NodeId from, NodeId to, SimTime t)
{
  double p = deliveryProb(from, to);
  if (isFaded(from, to, t)) {
    p = std::min(p, m_fading.badDeliveryProb);
  }
  return p;
}

const std::vector<NodeId>&
LinkModel::neighbors(NodeId node) const
{
  auto it = m_neighbors.find(node);
  return it == m_neighbors.end() ? m_none : it->second;
}

Duration
LinkModel::airtime(std::uint32_t frameBytes) const
{
  if (frameBytes == 0 || frameBytes > kMaxFrameBytes) {
    throw std::invalid_argument("frame length outside (0, 127] bytes");
  }
  double us = (m_phyOverhead + frameBytes) * 8.0 * 1e6 / m_bitRate;
  return Duration(static_cast<std::int64_t>(std::llround(us)));
}

RadioLog::RadioLog(std::size_t nodeCount)
  : m_nodes(nodeCount)
{
}

void
RadioLog::add(NodeId node, SimTime start, SimTime end, RadioState state)
{
  NodeLog& log = m_nodes.at(node);
  start = std::max(start, log.busyUntil);
  if (end <= start) {
    return;
  }
  Duration len = end - start;
  Duration tx = log.cumTx.empty() ? Duration{0} : log.cumTx.back();
  Duration rx = log.cumRx.empty() ? Duration{0} : log.cumRx.back();
  (state == RadioState::Tx ? tx : rx) += len;
  log.intervals.push_back({start, end, state});
  log.cumTx.push_back(tx);
  log.cumRx.push_back(rx);
  log.busyUntil = end;
}

RadioTotals
RadioLog::totalsAt(NodeId node, SimTime at) const
{
  const NodeLog& log = m_nodes.at(node);
  RadioTotals totals;
  // first interval ending after `at`
  auto it = std::upper_bound(log.intervals.begin(), log.intervals.end(), at,
                             [] (SimTime t, const Interval& iv) { return t < iv.end; });
  auto idx = static_cast<std::size_t>(it - log.intervals.begin());
  if (idx > 0) {
    totals.tx = log.cumTx[idx - 1];
    totals.rx = log.cumRx[idx - 1];
  }
  if (it != log.intervals.end() && it->start < at) {
    (it->state == RadioState::Tx ? totals.tx : totals.rx) += at - it->start;
  }
  totals.idle = at - totals.tx - totals.rx;
  return totals;
}

std::vector<RadioTotals>
RadioLog::windows(NodeId node, Duration window, SimTime runEnd) const
{
  if (window <= Duration::zero()) {
    throw std::invalid_argument("window must be positive");
  }
  std::vector<RadioTotals> out;
  RadioTotals prev;
  for (SimTime start{0}; start < runEnd; start += window) {
    SimTime end = std::min(start + window, runEnd);
    RadioTotals cur = totalsAt(node, end);
    out.push_back({cur.tx - prev.tx, cur.rx - prev.rx, cur.idle - prev.idle});
    prev = cur;
  }
  return out;
}

Mac::Mac(Simulator& sim, LinkModel& links, const RandomStreams& streams, TraceLog& trace,
         MacConfig config, std::size_t nodeCount)
  : m_sim(sim)
  , m_links(links)
  , m_trace(trace)
  , m_config(config)
  , m_radio(nodeCount)
  , m_receivers(nodeCount)
{
  m_nodes.reserve(nodeCount);
  for (std::size_t i = 0; i < nodeCount; ++i) {
    m_nodes.push_back(NodeState{{}, false, streams.stream("mac", static_cast<std::int64_t>(i)), {}});
  }
}

void
Mac::setReceiver(NodeId node, FrameKind kind, ReceiveHandler handler)
{
  m_receivers.at(node)[kind] = std::move(handler);
}

void
Mac::deliver(const Frame& frame, NodeId to)
{
  auto& handlers = m_receivers[to];
  auto it = handlers.find(frame.kind);
  if (it != handlers.end() && it->second) {
    it->second(frame);
  }
}

void
Mac::validate(const Frame& f) const
{
  if (f.bytes == 0 || f.bytes > kMaxFrameBytes) {
    throw std::invalid_argument("frame of " + std::to_string(f.bytes) + " B exceeds the 127 B MTU");
  }
  if (f.appBytes > f.bytes) {
    throw std::invalid_argument("application payload larger than frame");
  }
  if (f.src < 0 || static_cast<std::size_t>(f.src) >= m_nodes.size()) {
    throw std::invalid_argument("unknown frame source");
  }
}

void
Mac::unicast(Frame frame, DoneHandler done)
{
  validate(frame);
  if (frame.dst == kBroadcast) {
    throw std::invalid_argument("unicast to broadcast address");
  }
  if (!m_links.hasLink(frame.src, frame.dst)) {
    throw std::invalid_argument("no link " + std::to_string(frame.src) + "->" +
                                std::to_string(frame.dst));
  }
  NodeId src = frame.src;
  m_nodes[src].queue.push_back({std::move(frame), std::move(done)});
  startNext(src);
}

void
Mac::broadcast(Frame frame)
{
  validate(frame);
  frame.dst = kBroadcast;
  NodeId src = frame.src;
  m_nodes[src].queue.push_back({std::move(frame), {}});
  startNext(src);
}

void
Mac::startNext(NodeId node)
{
  NodeState& st = m_nodes[node];
  if (st.busy || st.queue.empty()) {
    return;
  }
  st.busy = true;
  st.queue.front().frame.id = m_nextFrameId++;
  if (st.queue.front().frame.dst == kBroadcast) {
    doBroadcast(node);
  }
  else {
    attempt(node, 1);
  }
}

void
Mac::traceFrame(TraceKind kind, NodeId node, SimTime t, const Frame& f, int attemptNo,
                std::string_view label)
{
  TraceRecord r;
  r.t = t;
  r.node = node;
  r.kind = kind;
  r.label = label.empty() ? f.label : std::string(label);
  r.src = f.src;
  r.dst = f.dst;
  r.attempt = static_cast<std::uint32_t>(attemptNo);
  r.frame = f.id;
  if (label.empty()) {
    r.item = f.item;
    r.bytes = f.bytes;
    r.appBytes = f.appBytes;
  }
  else {
    r.bytes = m_config.ackBytes;
  }
  m_trace.add(std::move(r));
}

void
Mac::attempt(NodeId node, int attemptNo)
{
  NodeState& st = m_nodes[node];
  const Frame& f = st.queue.front().frame;
  SimTime t = m_sim.now();
  Duration air = m_links.airtime(f.bytes);
  Duration ackAir = m_links.airtime(m_config.ackBytes);

  traceFrame(TraceKind::Tx, node, t, f, attemptNo);
  m_radio.add(f.src, t, t + air, RadioState::Tx);
  m_radio.add(f.dst, t, t + air, RadioState::Rx);

  bool received = st.rng.bernoulli(m_links.deliveryProbAt(f.src, f.dst, t));
  bool acked = false;
  SimTime ackStart = t + air + m_config.turnaround;
  if (received) {
    traceFrame(TraceKind::Rx, f.dst, t + air, f, attemptNo);
    auto& last = m_nodes[f.dst].lastDelivered;
    auto it = last.find(f.src);
    if (it == last.end() || it->second != f.id) {
      last[f.src] = f.id;
      m_sim.schedule(air, [this, frame = f] { deliver(frame, frame.dst); });
    }
    m_radio.add(f.dst, ackStart, ackStart + ackAir, RadioState::Tx);
    m_radio.add(f.src, ackStart, ackStart + ackAir, RadioState::Rx);
    traceFrame(TraceKind::Tx, f.dst, ackStart, f, attemptNo, "mac-ack");
    acked = st.rng.bernoulli(m_links.deliveryProbAt(f.dst, f.src, ackStart));
    if (acked) {
      traceFrame(TraceKind::Rx, f.src, ackStart + ackAir, f, attemptNo, "mac-ack");
    }
  }

  if (acked) {
    m_sim.scheduleAt(ackStart + ackAir, [this, node, attemptNo] {
      finish(node, {true, attemptNo});
    });
  }
  else if (attemptNo < 1 + m_config.maxFrameRetries) {
    Duration backoff = st.rng.uniformDuration(m_config.backoffMin, m_config.backoffMax);
    m_sim.schedule(air + m_config.ackTimeout + backoff, [this, node, attemptNo] {
      attempt(node, attemptNo + 1);
    });
  }
  else {
    m_sim.schedule(air + m_config.ackTimeout, [this, node, attemptNo] {
      finish(node, {false, attemptNo});
    });
  }
}

void
Mac::doBroadcast(NodeId node)
{
  NodeState& st = m_nodes[node];
  const Frame& f = st.queue.front().frame;
  SimTime t = m_sim.now();
  Duration air = m_links.airtime(f.bytes);

  traceFrame(TraceKind::Tx, node, t, f, 1);
  m_radio.add(node, t, t + air, RadioState::Tx);
  for (NodeId v : m_links.neighbors(node)) {
    if (!st.rng.bernoulli(m_links.deliveryProbAt(node, v, t))) {
      continue;
    }
    m_radio.add(v, t, t + air, RadioState::Rx);
    traceFrame(TraceKind::Rx, v, t + air, f, 1);
    m_sim.schedule(air, [this, v, frame = f] { deliver(frame, v); });
  }
  m_sim.schedule(air, [this, node] { finish(node, {true, 1}); });
}

void
Mac::finish(NodeId node, MacOutcome outcome)
{
  NodeState& st = m_nodes[node];
  Pending done = std::move(st.queue.front());
  st.queue.pop_front();
  st.busy = false;
  if (!outcome.delivered) {
    TraceRecord r;
    r.t = m_sim.now();
    r.node = node;
    r.kind = TraceKind::MacDrop;
    r.label = done.frame.label;
    r.item = done.frame.item;
    r.src = done.frame.src;
    r.dst = done.frame.dst;
    r.attempt = static_cast<std::uint32_t>(outcome.attempts);
    r.frame = done.frame.id;
    m_trace.add(std::move(r));
  }
  if (done.done) {
    done.done(outcome);
  }
  startNext(node);
}

} // namespace iotsim
