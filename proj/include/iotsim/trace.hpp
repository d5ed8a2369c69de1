#pragma once

#include "iotsim/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace iotsim {

enum class TraceKind {
  Tx,
  Rx,
  MacDrop,
  L3Drop,
  Publish,
  Deliver,
  Expire,
  StateSample,
  Event,
};

std::string_view
toString(TraceKind kind);

TraceKind
traceKindFromString(std::string_view s);

/// Cumulative radio state durations of one node.
struct RadioTotals
{
  Duration tx{0};
  Duration rx{0};
  Duration idle{0};
};

/// One timestamped network event. Metrics are computed from these alone.
struct TraceRecord
{
  SimTime t{0};
  NodeId node = kNoNode;
  TraceKind kind = TraceKind::Event;
  /// Frame label on tx/rx ("interest", "coap-put", "mac-ack", ...) or the
  /// reason on drops and events ("pit-drop", "exchange-timeout", ...).
  std::string label;
  std::optional<ItemId> item;
  std::uint32_t bytes = 0;
  std::uint32_t appBytes = 0;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  std::uint32_t attempt = 0;
  std::uint64_t frame = 0;
  /// On deliver records: publish time of the item.
  SimTime ref{0};
  RadioTotals radio;

  bool
  carriesPayload() const
  {
    return appBytes > 0 && item.has_value();
  }
};

class TraceLog
{
public:
  void
  add(TraceRecord record)
  {
    m_records.push_back(std::move(record));
  }

  /// Orders records by time; records with equal time keep insertion order.
  void
  finalize();

  const std::vector<TraceRecord>&
  records() const
  {
    return m_records;
  }

  std::size_t
  size() const
  {
    return m_records.size();
  }

private:
  std::vector<TraceRecord> m_records;
};

std::string
toJsonLine(const TraceRecord& record);

TraceRecord
fromJsonLine(const std::string& line);

void
writeJsonLines(const TraceLog& log, std::ostream& os);

} // namespace iotsim
