#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>

namespace iotsim {

/// Virtual time and durations, both in microseconds since simulation start.
using Duration = std::chrono::microseconds;
using SimTime = std::chrono::microseconds;

using NodeId = std::int32_t;

inline constexpr NodeId kBroadcast = -1;
inline constexpr NodeId kNoNode = -2;

/// Identifies one published content item: producer prefix plus local counter.
struct ItemId
{
  NodeId producer = kNoNode;
  std::uint32_t seq = 0;

  auto operator<=>(const ItemId&) const = default;
};

inline std::string
toString(const ItemId& item)
{
  return "/p" + std::to_string(item.producer) + "/" + std::to_string(item.seq);
}

inline double
toSeconds(Duration d)
{
  return std::chrono::duration<double>(d).count();
}

inline Duration
fromSeconds(double s)
{
  return Duration(static_cast<std::int64_t>(s * 1e6 + (s >= 0 ? 0.5 : -0.5)));
}

} // namespace iotsim
