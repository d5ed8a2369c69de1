#pragma once

#include "iotsim/topology.hpp"
#include "iotsim/trace.hpp"

#include <map>
#include <vector>

namespace iotsim {

struct TtcSample
{
  ItemId item;
  SimTime publish{0};
  SimTime deliver{0};

  Duration
  ttc() const
  {
    return deliver - publish;
  }
};

struct LossSummary
{
  std::size_t published = 0;
  std::size_t delivered = 0;

  std::size_t
  lost() const
  {
    return published - delivered;
  }

  double
  rate() const;
};

struct GoodputWindow
{
  SimTime start{0};
  double bytesPerSecond = 0.0;
};

struct GoodputSeries
{
  std::vector<GoodputWindow> windows;
  double optimum = 0.0;

  double
  mean() const;

  /// Coefficient of variation across windows.
  double
  cv() const;
};

struct LinkStressPoint
{
  int traversals = 0;
  int shortest = 0;
  bool delivered = false;
  std::size_t multiplicity = 0;
};

struct EnergyPoint
{
  NodeId node = kNoNode;
  SimTime windowStart{0};
  double windowMj = 0.0;
  double cumulativeMj = 0.0;
};

struct PowerLevels
{
  double txMw = 42.0;
  double rxMw = 36.9;
  double idleMw = 0.00006;
};

struct Overhead
{
  std::uint64_t controlBytes = 0;
  std::uint64_t controlFrames = 0;
  std::uint64_t payloadFrames = 0;
  std::uint64_t payloadBytes = 0;
  std::uint64_t requests = 0;
  std::size_t deliveredItems = 0;

  double
  byteRatio() const;

  double
  frameRatio() const;

  double
  requestsPerItem() const;
};

/// Published and (uniquely) delivered item counts; throws if nothing was published.
LossSummary
lossSummary(const TraceLog& trace);

/// One sample per delivered item, at its first delivery.
std::vector<TtcSample>
ttcSamples(const TraceLog& trace);

/// Linear-interpolated empirical quantile of unsorted values.
double
quantile(std::vector<double> values, double q);

double
goodputOptimum(std::size_t producers, std::uint32_t payloadBytes, Duration interval);

/// Windows tiling [from, to); unique delivered payload bytes by delivery time.
GoodputSeries
goodput(const TraceLog& trace, Duration window, double optimum, SimTime from, SimTime to);

/// Windows span the steady phase: from the last producer's first publish to
/// the first producer's last publish.
GoodputSeries
goodput(const TraceLog& trace, Duration window, double optimum);

/// Payload-bearing frame transmissions per item; MAC retries of one frame
/// count once.
std::map<ItemId, int>
traversals(const TraceLog& trace);

std::vector<LinkStressPoint>
linkStress(const TraceLog& trace, const Topology& topo);

/// Per-node, per-window energy from state samples.
std::vector<EnergyPoint>
energy(const TraceLog& trace, const PowerLevels& power);

/// Final cumulative energy per node.
std::map<NodeId, double>
energyTotals(const TraceLog& trace, const PowerLevels& power);

/// Bytes and frames not carrying application payload (including MAC acks and
/// beacons) relative to delivered payload.
Overhead
controlOverhead(const TraceLog& trace, NodeId sink);

/// L3 transmissions (first MAC attempt) with a given label from one node.
std::vector<SimTime>
l3Attempts(const TraceLog& trace, NodeId node, std::string_view label);

} // namespace iotsim
