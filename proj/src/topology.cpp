#include "iotsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace iotsim {

namespace {

constexpr double kEstimateWeight = 0.2;

std::vector<int>
bfsRanks(const Topology& topo, NodeId root)
{
  std::vector<int> rank(topo.size(), -1);
  std::deque<NodeId> queue{root};
  rank[root] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : topo.adjacency[u]) {
      if (rank[v] < 0) {
        rank[v] = rank[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return rank;
}

double
linkProb(const Topology& topo, NodeId a, NodeId b)
{
  for (const Link& l : topo.links) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) {
      return l.p;
    }
  }
  return 0.0;
}

} // namespace

std::vector<NodeId>
Topology::producers() const
{
  std::vector<NodeId> out;
  for (NodeId n = 0; n < static_cast<NodeId>(size()); ++n) {
    if (n != sink) {
      out.push_back(n);
    }
  }
  return out;
}

void
Topology::addLink(NodeId a, NodeId b, double p)
{
  if (a == b) {
    throw std::invalid_argument("self link");
  }
  links.push_back({a, b, p});
  adjacency.at(a).push_back(b);
  adjacency.at(b).push_back(a);
}

void
Topology::applyTo(LinkModel& model) const
{
  for (const Link& l : links) {
    model.setSymmetric(l.a, l.b, l.p);
  }
}

Topology
buildSingleHop(double p)
{
  return buildChain(1, p);
}

Topology
buildChain(int hops, double p)
{
  if (hops < 1) {
    throw std::invalid_argument("chain needs at least one hop");
  }
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("delivery probability outside [0, 1]");
  }
  Topology topo;
  topo.positions.resize(hops + 1);
  topo.adjacency.resize(hops + 1);
  for (int i = 0; i <= hops; ++i) {
    topo.positions[i] = {static_cast<double>(i), 0.0};
    if (i > 0) {
      topo.addLink(i - 1, i, p);
    }
  }
  return topo;
}

int
shortestHops(const Topology& topo, NodeId src, NodeId dst)
{
  if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= topo.size() ||
      static_cast<std::size_t>(dst) >= topo.size()) {
    throw std::out_of_range("unknown node");
  }
  int hops = bfsRanks(topo, src)[dst];
  if (hops < 0) {
    throw std::runtime_error("node " + std::to_string(dst) + " unreachable from " +
                             std::to_string(src));
  }
  return hops;
}

TreeState::TreeState(const Topology& topo)
{
  std::vector<int> rank = bfsRanks(topo, topo.sink);
  std::size_t n = topo.size();
  m_rank = rank;
  m_parent.assign(n, kNoNode);
  m_candidates.resize(n);
  for (NodeId v = 0; v < static_cast<NodeId>(n); ++v) {
    if (rank[v] < 0) {
      throw std::runtime_error("node " + std::to_string(v) + " cannot reach the sink");
    }
    if (v == topo.sink) {
      continue;
    }
    double bestP = -1.0;
    for (NodeId u : topo.adjacency[v]) {
      double p = linkProb(topo, u, v);
      if (rank[u] == rank[v] - 1 && p > bestP) {
        bestP = p;
        m_parent[v] = u;
      }
    }
    for (NodeId u : topo.adjacency[v]) {
      if (u != m_parent[v] && rank[u] <= rank[v]) {
        m_candidates[v][u] = {rank[u], 1.0};
      }
    }
  }
}

int
TreeState::maxRank() const
{
  return m_rank.empty() ? 0 : *std::max_element(m_rank.begin(), m_rank.end());
}

std::vector<NodeId>
TreeState::children(NodeId node) const
{
  std::vector<NodeId> out;
  for (NodeId v = 0; v < static_cast<NodeId>(m_parent.size()); ++v) {
    if (m_parent[v] == node) {
      out.push_back(v);
    }
  }
  return out;
}

std::vector<NodeId>
TreeState::subtree(NodeId node) const
{
  std::vector<NodeId> out{node};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (NodeId c : children(out[i])) {
      out.push_back(c);
    }
  }
  return out;
}

bool
TreeState::isDescendant(NodeId node, NodeId ancestor) const
{
  for (NodeId v = node; v != kNoNode; v = m_parent.at(v)) {
    if (v == ancestor) {
      return true;
    }
  }
  return false;
}

std::vector<NodeId>
TreeState::candidates(NodeId node) const
{
  std::vector<std::pair<NodeId, Candidate>> list(m_candidates.at(node).begin(),
                                                  m_candidates.at(node).end());
  std::stable_sort(list.begin(), list.end(), [] (const auto& x, const auto& y) {
    if (x.second.rank != y.second.rank) {
      return x.second.rank < y.second.rank;
    }
    return x.second.estimate > y.second.estimate;
  });
  std::vector<NodeId> out;
  for (const auto& [id, c] : list) {
    if (id != m_parent[node]) {
      out.push_back(id);
    }
  }
  return out;
}

void
TreeState::onBeacon(NodeId receiver, NodeId origin, int originRank)
{
  auto& cands = m_candidates.at(receiver);
  if (origin == m_parent.at(receiver)) {
    return;
  }
  if (originRank <= m_rank.at(receiver)) {
    cands.try_emplace(origin).first->second.rank = originRank;
  }
  else {
    cands.erase(origin);
  }
}

void
TreeState::recordLinkOutcome(NodeId node, NodeId neighbor, bool success)
{
  auto& cands = m_candidates.at(node);
  auto it = cands.find(neighbor);
  if (it == cands.end()) {
    if (neighbor != m_parent.at(node)) {
      return;
    }
    it = cands.emplace(neighbor, Candidate{m_rank.at(neighbor), 1.0}).first;
  }
  it->second.estimate =
    (1.0 - kEstimateWeight) * it->second.estimate + kEstimateWeight * (success ? 1.0 : 0.0);
}

double
TreeState::linkEstimate(NodeId node, NodeId neighbor) const
{
  const auto& cands = m_candidates.at(node);
  auto it = cands.find(neighbor);
  return it == cands.end() ? 1.0 : it->second.estimate;
}

void
TreeState::switchParent(NodeId node, NodeId newParent)
{
  if (newParent == node || isDescendant(newParent, node)) {
    throw std::invalid_argument("uplink switch would create a cycle");
  }
  NodeId old = m_parent.at(node);
  m_parent[node] = newParent;
  int delta = m_rank.at(newParent) + 1 - m_rank[node];
  for (NodeId v : subtree(node)) {
    m_rank[v] += delta;
  }
  auto& cands = m_candidates[node];
  Candidate demoted{m_rank.at(old), cands.count(old) ? cands[old].estimate : 0.0};
  if (!cands.count(newParent)) {
    cands[newParent] = {m_rank[newParent], 1.0};
  }
  if (demoted.rank <= m_rank[node]) {
    cands[old] = demoted;
  }
}

std::optional<NodeId>
TreeState::bestAlternative(NodeId node) const
{
  for (NodeId c : candidates(node)) {
    if (m_rank.at(c) <= m_rank.at(node) && !isDescendant(c, node)) {
      return c;
    }
  }
  return std::nullopt;
}

std::pair<Topology, TreeState>
buildTree(const TreeSpec& spec, const RandomStreams& streams)
{
  if (spec.nodes < 1 || spec.depthMin < 1 || spec.depthMax < spec.depthMin) {
    throw std::invalid_argument("invalid tree spec");
  }
  if (spec.pLo > spec.pHi || spec.pLo < 0.0 || spec.pHi > 1.0) {
    throw std::invalid_argument("invalid link probability range");
  }
  Rng rng = streams.stream("topology");
  int n = spec.nodes + 1;
  for (int attempt = 0; attempt < spec.maxRedraws; ++attempt) {
    Topology topo;
    topo.positions.resize(n);
    topo.adjacency.resize(n);
    for (int i = 1; i < n; ++i) {
      topo.positions[i] = {rng.uniform(), rng.uniform()};
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double dx = topo.positions[i].x - topo.positions[j].x;
        double dy = topo.positions[i].y - topo.positions[j].y;
        if (std::hypot(dx, dy) <= spec.radius) {
          topo.addLink(i, j, rng.uniform(spec.pLo, spec.pHi));
        }
      }
    }
    std::vector<int> rank = bfsRanks(topo, topo.sink);
    if (std::find(rank.begin(), rank.end(), -1) != rank.end()) {
      continue;
    }
    int depth = *std::max_element(rank.begin(), rank.end());
    if (depth < spec.depthMin || depth > spec.depthMax) {
      continue;
    }
    TreeState tree(topo);
    return {std::move(topo), std::move(tree)};
  }
  throw std::runtime_error("no connected tree within the depth range after " +
                           std::to_string(spec.maxRedraws) + " draws");
}

NodeId
IpFib::lookup(NodeId dst) const
{
  auto it = hostRoutes.find(dst);
  return it == hostRoutes.end() ? defaultRoute : it->second;
}

RouteTables
installRoutes(const Topology& topo, const TreeState& tree, RouteFamily family,
              std::size_t fibCapacity)
{
  std::size_t n = topo.size();
  RouteTables tables;
  tables.ip.resize(n);
  tables.ndn.resize(n);
  for (NodeId v = 0; v < static_cast<NodeId>(n); ++v) {
    switch (family) {
      case RouteFamily::Ip: {
        IpFib& fib = tables.ip[v];
        if (v != topo.sink) {
          fib.defaultRoute = tree.parent(v);
        }
        for (NodeId d : tree.subtree(v)) {
          if (d == v) {
            continue;
          }
          NodeId hop = d;
          while (tree.parent(hop) != v) {
            hop = tree.parent(hop);
          }
          fib.hostRoutes[d] = hop;
        }
        if (fib.size() > fibCapacity) {
          throw std::runtime_error("ip fib capacity exceeded at node " + std::to_string(v));
        }
        break;
      }
      case RouteFamily::NdnPull: {
        auto& fib = tables.ndn[v];
        for (NodeId d : tree.subtree(v)) {
          if (d == v) {
            if (v != topo.sink) {
              fib[d] = kAppFace;
            }
            continue;
          }
          NodeId hop = d;
          while (tree.parent(hop) != v) {
            hop = tree.parent(hop);
          }
          fib[d] = hop;
        }
        if (fib.size() > fibCapacity) {
          throw std::runtime_error("ndn fib capacity exceeded at node " + std::to_string(v));
        }
        break;
      }
      case RouteFamily::NdnUp:
        tables.ndn[v][kDefaultPrefix] = v == topo.sink ? kAppFace : tree.parent(v);
        break;
    }
  }
  return tables;
}

BeaconService::BeaconService(Simulator& sim, Mac& mac, TreeState& tree,
                             const RandomStreams& streams, Duration interval,
                             std::uint32_t beaconBytes)
  : m_sim(sim)
  , m_mac(mac)
  , m_tree(tree)
  , m_rng(streams.stream("beacon"))
  , m_interval(interval)
  , m_bytes(beaconBytes)
{
  if (interval <= Duration::zero()) {
    throw std::invalid_argument("beacon interval must be positive");
  }
}

void
BeaconService::start(SimTime stopAt)
{
  m_stopAt = stopAt;
  for (NodeId v = 0; v < static_cast<NodeId>(m_tree.size()); ++v) {
    m_mac.setReceiver(v, FrameKind::Beacon, [this, v] (const Frame& f) {
      const auto& b = std::get<Beacon>(f.packet);
      m_tree.onBeacon(v, b.origin, b.rank);
    });
    Duration first = m_rng.uniformDuration(Duration{0}, m_interval);
    m_sim.schedule(first, [this, v] { tick(v); });
  }
}

void
BeaconService::tick(NodeId node)
{
  if (m_sim.now() >= m_stopAt) {
    return;
  }
  Frame f;
  f.src = node;
  f.dst = kBroadcast;
  f.bytes = m_bytes;
  f.kind = FrameKind::Beacon;
  f.label = "beacon";
  f.packet = Beacon{node, m_tree.rank(node)};
  m_mac.broadcast(std::move(f));
  auto jitter = static_cast<std::int64_t>(m_interval.count() * 0.1);
  Duration next = m_rng.uniformDuration(m_interval - Duration{jitter}, m_interval + Duration{jitter});
  m_sim.schedule(next, [this, node] { tick(node); });
}

} // namespace iotsim
