#include "iotsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace iotsim {

double
LossSummary::rate() const
{
  return 1.0 - static_cast<double>(delivered) / static_cast<double>(published);
}

double
GoodputSeries::mean() const
{
  if (windows.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& w : windows) {
    sum += w.bytesPerSecond;
  }
  return sum / static_cast<double>(windows.size());
}

double
GoodputSeries::cv() const
{
  if (windows.size() < 2) {
    return 0.0;
  }
  double m = mean();
  double ss = 0.0;
  for (const auto& w : windows) {
    ss += (w.bytesPerSecond - m) * (w.bytesPerSecond - m);
  }
  double sd = std::sqrt(ss / static_cast<double>(windows.size() - 1));
  return m > 0.0 ? sd / m : 0.0;
}

double
Overhead::byteRatio() const
{
  return payloadBytes == 0 ? 0.0 : static_cast<double>(controlBytes) / static_cast<double>(payloadBytes);
}

double
Overhead::frameRatio() const
{
  return payloadFrames == 0 ? 0.0
                            : static_cast<double>(controlFrames) / static_cast<double>(payloadFrames);
}

double
Overhead::requestsPerItem() const
{
  return deliveredItems == 0 ? 0.0
                             : static_cast<double>(requests) / static_cast<double>(deliveredItems);
}

LossSummary
lossSummary(const TraceLog& trace)
{
  std::set<ItemId> published;
  std::set<ItemId> delivered;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind == TraceKind::Publish && r.item) {
      published.insert(*r.item);
    }
    else if (r.kind == TraceKind::Deliver && r.item) {
      delivered.insert(*r.item);
    }
  }
  if (published.empty()) {
    throw std::invalid_argument("no published items in trace");
  }
  return {published.size(), delivered.size()};
}

std::vector<TtcSample>
ttcSamples(const TraceLog& trace)
{
  std::map<ItemId, TtcSample> first;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind == TraceKind::Deliver && r.item) {
      auto it = first.find(*r.item);
      if (it == first.end() || r.t < it->second.deliver) {
        first[*r.item] = {*r.item, r.ref, r.t};
      }
    }
  }
  std::vector<TtcSample> out;
  out.reserve(first.size());
  for (const auto& [item, s] : first) {
    out.push_back(s);
  }
  return out;
}

double
quantile(std::vector<double> values, double q)
{
  if (values.empty()) {
    throw std::invalid_argument("quantile of empty sample");
  }
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double
goodputOptimum(std::size_t producers, std::uint32_t payloadBytes, Duration interval)
{
  return static_cast<double>(producers) * payloadBytes / toSeconds(interval);
}

GoodputSeries
goodput(const TraceLog& trace, Duration window, double optimum, SimTime from, SimTime to)
{
  if (window <= Duration::zero()) {
    throw std::invalid_argument("goodput window must be positive");
  }
  GoodputSeries series;
  series.optimum = optimum;
  if (to <= from) {
    return series;
  }
  auto count = static_cast<std::size_t>((to - from) / window);
  std::vector<double> bytes(count, 0.0);
  std::set<ItemId> seen;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind != TraceKind::Deliver || !r.item || !seen.insert(*r.item).second) {
      continue;
    }
    if (r.t < from) {
      continue;
    }
    auto idx = static_cast<std::size_t>((r.t - from) / window);
    if (idx < count) {
      bytes[idx] += r.appBytes;
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    series.windows.push_back({from + window * static_cast<std::int64_t>(i), bytes[i] / toSeconds(window)});
  }
  return series;
}

GoodputSeries
goodput(const TraceLog& trace, Duration window, double optimum)
{
  std::map<NodeId, std::pair<SimTime, SimTime>> span;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind != TraceKind::Publish) {
      continue;
    }
    auto [it, inserted] = span.try_emplace(r.node, r.t, r.t);
    it->second.first = std::min(it->second.first, r.t);
    it->second.second = std::max(it->second.second, r.t);
  }
  if (span.empty()) {
    return {{}, optimum};
  }
  SimTime from{0};
  SimTime to = SimTime::max();
  for (const auto& [node, s] : span) {
    from = std::max(from, s.first);
    to = std::min(to, s.second);
  }
  return goodput(trace, window, optimum, from, to);
}

std::map<ItemId, int>
traversals(const TraceLog& trace)
{
  std::map<ItemId, int> out;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind == TraceKind::Tx && r.attempt == 1 && r.carriesPayload()) {
      ++out[*r.item];
    }
  }
  return out;
}

std::vector<LinkStressPoint>
linkStress(const TraceLog& trace, const Topology& topo)
{
  auto counts = traversals(trace);
  std::set<ItemId> delivered;
  std::vector<ItemId> published;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind == TraceKind::Deliver && r.item) {
      delivered.insert(*r.item);
    }
    else if (r.kind == TraceKind::Publish && r.item) {
      published.push_back(*r.item);
    }
  }
  std::map<NodeId, int> hops;
  std::map<std::tuple<int, int, bool>, std::size_t> points;
  for (const ItemId& item : published) {
    auto h = hops.find(item.producer);
    if (h == hops.end()) {
      h = hops.emplace(item.producer, shortestHops(topo, item.producer, topo.sink)).first;
    }
    auto c = counts.find(item);
    int n = c == counts.end() ? 0 : c->second;
    ++points[{n, h->second, delivered.count(item) > 0}];
  }
  std::vector<LinkStressPoint> out;
  for (const auto& [key, mult] : points) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mult});
  }
  return out;
}

std::vector<EnergyPoint>
energy(const TraceLog& trace, const PowerLevels& power)
{
  if (power.txMw <= 0 || power.rxMw <= 0 || power.idleMw <= 0) {
    throw std::invalid_argument("power levels must be positive");
  }
  std::map<NodeId, std::pair<SimTime, RadioTotals>> last;
  std::map<NodeId, double> cumulative;
  std::vector<EnergyPoint> out;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind != TraceKind::StateSample) {
      continue;
    }
    auto it = last.find(r.node);
    if (it != last.end() && r.t > it->second.first) {
      const RadioTotals& prev = it->second.second;
      // mW * s = mJ
      double mj = power.txMw * toSeconds(r.radio.tx - prev.tx) +
                  power.rxMw * toSeconds(r.radio.rx - prev.rx) +
                  power.idleMw * toSeconds(r.radio.idle - prev.idle);
      double& cum = cumulative[r.node];
      cum += mj;
      out.push_back({r.node, it->second.first, mj, cum});
    }
    last[r.node] = {r.t, r.radio};
  }
  return out;
}

std::map<NodeId, double>
energyTotals(const TraceLog& trace, const PowerLevels& power)
{
  std::map<NodeId, double> totals;
  for (const EnergyPoint& p : energy(trace, power)) {
    totals[p.node] = p.cumulativeMj;
  }
  return totals;
}

Overhead
controlOverhead(const TraceLog& trace, NodeId sink)
{
  Overhead o;
  std::set<ItemId> delivered;
  std::uint32_t payload = 0;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind == TraceKind::Deliver && r.item) {
      delivered.insert(*r.item);
      payload = r.appBytes;
    }
    if (r.kind != TraceKind::Tx) {
      continue;
    }
    if (r.carriesPayload()) {
      ++o.payloadFrames;
    }
    else {
      ++o.controlFrames;
      o.controlBytes += r.bytes;
    }
    if (r.node == sink && r.src == sink && r.attempt == 1 &&
        (r.label == "interest" || r.label == "coap-get")) {
      ++o.requests;
    }
  }
  o.deliveredItems = delivered.size();
  o.payloadBytes = static_cast<std::uint64_t>(delivered.size()) * payload;
  return o;
}

std::vector<SimTime>
l3Attempts(const TraceLog& trace, NodeId node, std::string_view label)
{
  std::vector<SimTime> out;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind == TraceKind::Tx && r.node == node && r.src == node && r.attempt == 1 &&
        r.label == label) {
      out.push_back(r.t);
    }
  }
  return out;
}

} // namespace iotsim
