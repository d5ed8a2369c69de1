#pragma once

#include "iotsim/kernel.hpp"
#include "iotsim/phy_mac.hpp"
#include "iotsim/types.hpp"

#include <map>
#include <set>
#include <vector>

namespace iotsim {

struct Position
{
  double x = 0.0;
  double y = 0.0;
};

struct Link
{
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  double p = 1.0;
};

/// Nodes and symmetric links. Node 0 is the sink; all others are producers.
struct Topology
{
  NodeId sink = 0;
  std::vector<Position> positions;
  std::vector<Link> links;
  std::vector<std::vector<NodeId>> adjacency;

  std::size_t
  size() const
  {
    return positions.size();
  }

  std::vector<NodeId>
  producers() const;

  void
  addLink(NodeId a, NodeId b, double p);

  /// Installs every link in both directions.
  void
  applyTo(LinkModel& links) const;
};

Topology
buildSingleHop(double p);

/// Sink, then nodes 1..hops in a line.
Topology
buildChain(int hops, double p);

int
shortestHops(const Topology& topo, NodeId src, NodeId dst);

/// Parent tree rooted at the sink, plus candidate uplinks learned from beacons.
class TreeState
{
public:
  TreeState() = default;

  /// BFS tree; among equal-rank neighbors the best link becomes parent.
  explicit TreeState(const Topology& topo);

  NodeId
  parent(NodeId node) const
  {
    return m_parent.at(node);
  }

  int
  rank(NodeId node) const
  {
    return m_rank.at(node);
  }

  int
  maxRank() const;

  std::size_t
  size() const
  {
    return m_parent.size();
  }

  std::vector<NodeId>
  children(NodeId node) const;

  /// Node and everything below it.
  std::vector<NodeId>
  subtree(NodeId node) const;

  bool
  isDescendant(NodeId node, NodeId ancestor) const;

  /// Candidates ordered by (rank, link success estimate); the parent is excluded.
  std::vector<NodeId>
  candidates(NodeId node) const;

  /// A beacon from origin carrying its rank was heard by receiver.
  void
  onBeacon(NodeId receiver, NodeId origin, int originRank);

  void
  recordLinkOutcome(NodeId node, NodeId neighbor, bool success);

  double
  linkEstimate(NodeId node, NodeId neighbor) const;

  /// Re-parents node; ranks of its subtree follow. Throws if newParent is
  /// in the subtree of node.
  void
  switchParent(NodeId node, NodeId newParent);

  /// The first candidate with rank not above the node's own, if any.
  std::optional<NodeId>
  bestAlternative(NodeId node) const;

private:
  struct Candidate
  {
    int rank = 0;
    double estimate = 1.0;
  };

  std::vector<NodeId> m_parent;
  std::vector<int> m_rank;
  std::vector<std::map<NodeId, Candidate>> m_candidates;
};

struct TreeSpec
{
  int nodes = 50;
  int depthMin = 4;
  int depthMax = 6;
  double pLo = 0.80;
  double pHi = 0.95;
  double radius = 0.32;
  int maxRedraws = 10000;
};

/// Random geometric tree in the unit square with the sink at the origin,
/// re-drawn until connected with max rank inside the depth range.
std::pair<Topology, TreeState>
buildTree(const TreeSpec& spec, const RandomStreams& streams);

inline constexpr NodeId kAppFace = -3;
/// Name prefix matching every name.
inline constexpr NodeId kDefaultPrefix = -1;

enum class RouteFamily { Ip, NdnPull, NdnUp };

struct IpFib
{
  std::map<NodeId, NodeId> hostRoutes;
  NodeId defaultRoute = kNoNode;

  std::size_t
  size() const
  {
    return hostRoutes.size() + (defaultRoute == kNoNode ? 0 : 1);
  }

  /// Next hop toward dst, or kNoNode.
  NodeId
  lookup(NodeId dst) const;
};

struct RouteTables
{
  std::vector<IpFib> ip;
  /// Per node: name prefix (producer id or kDefaultPrefix) to face.
  std::vector<std::map<NodeId, NodeId>> ndn;
};

RouteTables
installRoutes(const Topology& topo, const TreeState& tree, RouteFamily family,
              std::size_t fibCapacity = 50);

/// Periodic rank beacons. Receivers refresh their candidate sets; nobody
/// reparents on a beacon.
class BeaconService
{
public:
  BeaconService(Simulator& sim, Mac& mac, TreeState& tree, const RandomStreams& streams,
                Duration interval, std::uint32_t beaconBytes);

  /// Schedules the first beacon of every node within one interval.
  void
  start(SimTime stopAt);

private:
  void
  tick(NodeId node);

  Simulator& m_sim;
  Mac& m_mac;
  TreeState& m_tree;
  Rng m_rng;
  Duration m_interval;
  std::uint32_t m_bytes;
  SimTime m_stopAt{0};
};

} // namespace iotsim
