#include "iotsim/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace iotsim {

EventHandle
Simulator::schedule(Duration delay, Action action)
{
  if (delay < Duration::zero()) {
    throw std::invalid_argument("negative event delay");
  }
  return scheduleAt(m_now + delay, std::move(action));
}

EventHandle
Simulator::scheduleAt(SimTime at, Action action)
{
  if (at < m_now) {
    throw std::invalid_argument("event scheduled in the past");
  }
  EventHandle handle{m_nextId++, at};
  m_queue.push({at, handle.id});
  m_actions.emplace(handle.id, std::move(action));
  return handle;
}

bool
Simulator::cancel(const EventHandle& handle)
{
  return m_actions.erase(handle.id) > 0;
}

bool
Simulator::isPending(const EventHandle& handle) const
{
  return m_actions.count(handle.id) > 0;
}

std::size_t
Simulator::runUntil(SimTime end)
{
  if (end < m_now) {
    throw std::invalid_argument("runUntil target lies in the past");
  }
  std::size_t dispatched = 0;
  while (!m_queue.empty() && m_queue.top().at <= end) {
    QueueEntry entry = m_queue.top();
    m_queue.pop();
    auto it = m_actions.find(entry.id);
    if (it == m_actions.end()) {
      continue; // cancelled
    }
    Action action = std::move(it->second);
    m_actions.erase(it);
    m_now = entry.at;
    action();
    ++dispatched;
  }
  m_now = end;
  return dispatched;
}

double
Rng::exponential(double mean)
{
  return -mean * std::log1p(-uniform());
}

Duration
Rng::uniformDuration(Duration lo, Duration hi)
{
  if (hi <= lo) {
    return lo;
  }
  auto span = static_cast<std::uint64_t>((hi - lo).count()) + 1;
  return lo + Duration(static_cast<std::int64_t>(next() % span));
}

std::uint64_t
splitMix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng
RandomStreams::stream(std::string_view module, std::int64_t a, std::int64_t b) const
{
  // FNV-1a over the label, then mixed with the seed and the numeric keys.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : module) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = splitMix64(m_seed ^ h);
  s = splitMix64(s ^ static_cast<std::uint64_t>(a));
  s = splitMix64(s ^ static_cast<std::uint64_t>(b));
  return Rng(s);
}

} // namespace iotsim
