#pragma once

#include "iotsim/kernel.hpp"
#include "iotsim/messages.hpp"
#include "iotsim/phy_mac.hpp"
#include "iotsim/topology.hpp"
#include "iotsim/trace.hpp"

#include <functional>
#include <list>
#include <map>
#include <optional>
#include <set>

namespace iotsim {

enum class PitPolicy { DropNew, OverwriteOldest };
enum class RetxTrigger { Timer, MacFailure };

struct NdnSizing
{
  std::uint32_t nameBytes = 24;
  std::uint32_t seqBytes = 4;
  std::uint32_t tlvBytes = 8;
  std::uint32_t dataExtraBytes = 4;

  std::uint32_t
  interestBytes(std::uint32_t payload = 0) const
  {
    return nameBytes + seqBytes + tlvBytes + payload;
  }

  std::uint32_t
  dataBytes(std::uint32_t payload) const
  {
    return interestBytes() + dataExtraBytes + payload;
  }
};

struct NdnConfig
{
  std::size_t pitCapacity = 16;
  PitPolicy pitPolicy = PitPolicy::DropNew;
  std::uint32_t csBytes = 10240;
  Duration retxInterval = std::chrono::seconds(2);
  int maxRetx = 4;
  Duration lifetime = std::chrono::seconds(10);
  RetxTrigger retxTrigger = RetxTrigger::Timer;
  Duration procDelay{1500};
  bool cacheData = true;
  std::uint32_t macHeaderBytes = 23;
  NdnSizing sizing;
};

struct PitEntry
{
  Interest interest;
  std::set<NodeId> inFaces;
  NodeId outFace = kNoNode;
  SimTime created{0};
  SimTime expiry{0};
  int retxCount = 0;
  std::uint64_t order = 0;
  EventHandle retxTimer;
  EventHandle expiryTimer;
};

/// Pending Interest Table with a hard entry limit.
class Pit
{
public:
  enum class Insert { Inserted, Dropped, Overwrote };

  Pit(std::size_t capacity, PitPolicy policy);

  PitEntry*
  find(const Name& name);

  /// On overwrite, the displaced entry is moved into `evicted`.
  Insert
  insert(PitEntry entry, std::optional<PitEntry>& evicted);

  std::optional<PitEntry>
  erase(const Name& name);

  std::size_t
  size() const
  {
    return m_entries.size();
  }

  std::size_t
  capacity() const
  {
    return m_capacity;
  }

private:
  std::size_t m_capacity;
  PitPolicy m_policy;
  std::uint64_t m_nextOrder = 0;
  std::map<Name, PitEntry> m_entries;
};

/// Byte-bounded LRU content cache. Pinned names are never evicted.
class ContentStore
{
public:
  explicit ContentStore(std::uint32_t capacityBytes);

  /// False if the payload cannot be made to fit.
  bool
  insert(const Name& name, std::uint32_t payloadLen, bool pinned = false);

  std::optional<std::uint32_t>
  lookup(const Name& name);

  bool
  contains(const Name& name) const
  {
    return m_index.count(name) > 0;
  }

  void
  unpin(const Name& name);

  std::uint32_t
  usedBytes() const
  {
    return m_used;
  }

  std::uint32_t
  capacityBytes() const
  {
    return m_capacity;
  }

  std::size_t
  size() const
  {
    return m_lru.size();
  }

private:
  struct Entry
  {
    Name name;
    std::uint32_t len;
    bool pinned;
  };

  std::uint32_t m_capacity;
  std::uint32_t m_used = 0;
  // front = most recently used
  std::list<Entry> m_lru;
  std::map<Name, std::list<Entry>::iterator> m_index;
};

/// Per-node NDN data plane.
class Forwarder
{
public:
  using InterestHandler = std::function<void(const Interest&, NodeId face)>;
  using DataHandler = std::function<void(const Data&)>;
  using ExpireHandler = std::function<void(const Interest&)>;
  using LinkObserver = std::function<void(NodeId neighbor, bool delivered)>;

  Forwarder(NodeId id, Simulator& sim, Mac& mac, TraceLog& trace, NdnConfig config);

  /// Registers the MAC receive path for Interest and Data frames.
  void
  attach();

  NodeId
  id() const
  {
    return m_id;
  }

  std::map<NodeId, NodeId>&
  fib()
  {
    return m_fib;
  }

  Pit&
  pit()
  {
    return m_pit;
  }

  ContentStore&
  cs()
  {
    return m_cs;
  }

  const NdnConfig&
  config() const
  {
    return m_config;
  }

  /// Interests forwarded to the application face.
  void
  onAppInterest(InterestHandler h)
  {
    m_appInterest = std::move(h);
  }

  /// Data satisfying an Interest the application expressed.
  void
  onAppData(DataHandler h)
  {
    m_appData = std::move(h);
  }

  /// An Interest the application expressed timed out unsatisfied.
  void
  onAppExpire(ExpireHandler h)
  {
    m_appExpire = std::move(h);
  }

  /// Sees every Interest arriving from a neighbor, before processing.
  void
  onInterestSeen(InterestHandler h)
  {
    m_interestSeen = std::move(h);
  }

  void
  onLinkOutcome(LinkObserver h)
  {
    m_linkObserver = std::move(h);
  }

  /// Longest-prefix match: producer prefix first, then the default prefix.
  NodeId
  nextHop(const Name& name) const;

  /// Application expresses an Interest; false if the PIT refused it.
  bool
  expressInterest(const Interest& interest);

  /// As expressInterest, but sent on an explicit face instead of the FIB.
  bool
  expressInterestVia(const Interest& interest, NodeId face);

  /// Application produces Data: cached (unless disabled) and used to
  /// satisfy any pending entry.
  void
  putData(const Data& data, bool pinned = false);

  void
  onInterest(NodeId face, const Interest& interest);

  void
  onData(NodeId face, const Data& data);

private:
  bool
  createEntry(const Interest& interest, NodeId inFace, NodeId outFace);

  void
  forward(const Name& name);

  void
  armRetx(const Name& name);

  void
  retransmit(const Name& name);

  void
  expire(const Name& name);

  void
  satisfy(PitEntry entry, const Data& data);

  void
  sendInterest(NodeId face, const Interest& interest, std::uint32_t attempt);

  void
  sendData(NodeId face, const Data& data);

  void
  traceL3(TraceKind kind, std::string_view label, const Name& name, NodeId face);

  NodeId m_id;
  Simulator& m_sim;
  Mac& m_mac;
  TraceLog& m_trace;
  NdnConfig m_config;
  Pit m_pit;
  ContentStore m_cs;
  std::map<NodeId, NodeId> m_fib;
  InterestHandler m_appInterest;
  DataHandler m_appData;
  ExpireHandler m_appExpire;
  LinkObserver m_linkObserver;
  InterestHandler m_interestSeen;
};

} // namespace iotsim
