#include "iotsim/trace.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <ostream>
#include <stdexcept>

namespace iotsim {

namespace {

constexpr std::array<std::pair<TraceKind, std::string_view>, 9> kKindNames{{
  {TraceKind::Tx, "tx"},
  {TraceKind::Rx, "rx"},
  {TraceKind::MacDrop, "mac-drop"},
  {TraceKind::L3Drop, "l3-drop"},
  {TraceKind::Publish, "publish"},
  {TraceKind::Deliver, "deliver"},
  {TraceKind::Expire, "expire"},
  {TraceKind::StateSample, "state-sample"},
  {TraceKind::Event, "event"},
}};

} // namespace

std::string_view
toString(TraceKind kind)
{
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) {
      return name;
    }
  }
  return "?";
}

TraceKind
traceKindFromString(std::string_view s)
{
  for (const auto& [k, name] : kKindNames) {
    if (name == s) {
      return k;
    }
  }
  throw std::invalid_argument("unknown trace kind: " + std::string(s));
}

void
TraceLog::finalize()
{
  std::stable_sort(m_records.begin(), m_records.end(),
                   [] (const TraceRecord& a, const TraceRecord& b) { return a.t < b.t; });
}

std::string
toJsonLine(const TraceRecord& r)
{
  nlohmann::ordered_json j;
  j["t"] = r.t.count();
  j["node"] = r.node;
  j["kind"] = toString(r.kind);
  if (!r.label.empty()) {
    j["label"] = r.label;
  }
  if (r.item) {
    j["item"] = {r.item->producer, r.item->seq};
  }
  if (r.kind == TraceKind::StateSample) {
    j["tx_us"] = r.radio.tx.count();
    j["rx_us"] = r.radio.rx.count();
    j["idle_us"] = r.radio.idle.count();
    return j.dump();
  }
  if (r.bytes > 0) {
    j["bytes"] = r.bytes;
  }
  if (r.appBytes > 0) {
    j["app_bytes"] = r.appBytes;
  }
  if (r.src != kNoNode) {
    j["src"] = r.src;
  }
  if (r.dst != kNoNode) {
    j["dst"] = r.dst;
  }
  if (r.attempt > 0) {
    j["attempt"] = r.attempt;
  }
  if (r.frame > 0) {
    j["frame"] = r.frame;
  }
  if (r.kind == TraceKind::Deliver || r.kind == TraceKind::Publish) {
    j["ref"] = r.ref.count();
  }
  return j.dump();
}

TraceRecord
fromJsonLine(const std::string& line)
{
  auto j = nlohmann::json::parse(line);
  TraceRecord r;
  r.t = SimTime(j.at("t").get<std::int64_t>());
  r.node = j.at("node").get<NodeId>();
  r.kind = traceKindFromString(j.at("kind").get<std::string>());
  r.label = j.value("label", std::string{});
  if (j.contains("item")) {
    r.item = ItemId{j["item"][0].get<NodeId>(), j["item"][1].get<std::uint32_t>()};
  }
  r.bytes = j.value("bytes", 0u);
  r.appBytes = j.value("app_bytes", 0u);
  r.src = j.value("src", kNoNode);
  r.dst = j.value("dst", kNoNode);
  r.attempt = j.value("attempt", 0u);
  r.frame = j.value("frame", std::uint64_t{0});
  r.ref = SimTime(j.value("ref", std::int64_t{0}));
  r.radio.tx = Duration(j.value("tx_us", std::int64_t{0}));
  r.radio.rx = Duration(j.value("rx_us", std::int64_t{0}));
  r.radio.idle = Duration(j.value("idle_us", std::int64_t{0}));
  return r;
}

void
writeJsonLines(const TraceLog& log, std::ostream& os)
{
  for (const auto& r : log.records()) {
    os << toJsonLine(r) << '\n';
  }
}

} // namespace iotsim
