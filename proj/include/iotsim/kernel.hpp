#pragma once

#include "iotsim/types.hpp"

#include <functional>
#include <queue>
#include <random>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iotsim {

struct EventHandle
{
  std::uint64_t id = 0;
  SimTime fireAt{};

  bool
  isValid() const
  {
    return id != 0;
  }
};

/// Single-threaded discrete-event engine. Events fire in (fireAt, id) order,
/// so events scheduled for the same tick run in insertion order.
class Simulator
{
public:
  using Action = std::function<void()>;

  SimTime
  now() const
  {
    return m_now;
  }

  EventHandle
  schedule(Duration delay, Action action);

  EventHandle
  scheduleAt(SimTime at, Action action);

  /// Returns true iff the event had not fired or been cancelled yet.
  bool
  cancel(const EventHandle& handle);

  bool
  isPending(const EventHandle& handle) const;

  /// Dispatches every live event with fireAt <= end, including events that
  /// handlers schedule along the way, then advances the clock to end.
  std::size_t
  runUntil(SimTime end);

  std::size_t
  pendingCount() const
  {
    return m_actions.size();
  }

private:
  struct QueueEntry
  {
    SimTime at;
    std::uint64_t id;

    bool
    operator>(const QueueEntry& other) const
    {
      return at != other.at ? at > other.at : id > other.id;
    }
  };

  SimTime m_now{0};
  std::uint64_t m_nextId = 1;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> m_queue;
  std::unordered_map<std::uint64_t, Action> m_actions;
};

/// One deterministic random stream.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0)
    : m_engine(seed)
  {
  }

  std::uint64_t
  next()
  {
    return m_engine();
  }

  /// Uniform in [0, 1), 53 bits of resolution.
  double
  uniform()
  {
    return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
  }

  double
  uniform(double lo, double hi)
  {
    return lo + (hi - lo) * uniform();
  }

  bool
  bernoulli(double p)
  {
    return uniform() < p;
  }

  double
  exponential(double mean);

  Duration
  uniformDuration(Duration lo, Duration hi);

private:
  std::mt19937_64 m_engine;
};

/// Derives independent named substreams from one run seed, so that draws made
/// by one module or node never shift the draws seen by another.
class RandomStreams
{
public:
  explicit RandomStreams(std::uint64_t seed)
    : m_seed(seed)
  {
  }

  std::uint64_t
  seed() const
  {
    return m_seed;
  }

  Rng
  stream(std::string_view module, std::int64_t a = -1, std::int64_t b = -1) const;

private:
  std::uint64_t m_seed;
};

std::uint64_t
splitMix64(std::uint64_t x);

} // namespace iotsim
