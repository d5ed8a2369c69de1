#pragma once

#include "iotsim/metrics.hpp"
#include "iotsim/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace iotsim {

/// Headline numbers of one run, as listed in the manifest.
struct RunSummary
{
  std::string protocol;
  std::string scenario;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string configHash;
  std::string dir;
  std::size_t published = 0;
  std::size_t delivered = 0;
  double lossRate = 0.0;
  double ttcMeanMs = 0.0;
  double ttcMedianMs = 0.0;
  double goodputMean = 0.0;
  double goodputOptimum = 0.0;
  double byteOverhead = 0.0;
  double frameOverhead = 0.0;
  double requestsPerItem = 0.0;
};

RunSummary
summarize(const RunResult& run);

/// 64-bit FNV-1a of the canonical config JSON, in hex.
std::string
configHash(const ScenarioConfig& config);

void
writeTtcCsv(const std::vector<TtcSample>& samples, std::ostream& os);

void
writeLossCsv(const LossSummary& loss, std::ostream& os);

void
writeGoodputCsv(const GoodputSeries& series, std::ostream& os);

void
writeLinkStressCsv(const std::vector<LinkStressPoint>& points, std::ostream& os);

void
writeEnergyCsv(const std::vector<EnergyPoint>& points, std::ostream& os);

void
writeOverheadCsv(const Overhead& overhead, std::ostream& os);

std::string
topologyJson(const RunResult& run);

/// Writes the metric CSVs, topology.json and optionally trace.jsonl into dir.
void
writeRunOutputs(const RunResult& run, const std::filesystem::path& dir, bool withTrace);

void
writeManifest(const std::filesystem::path& path, const std::vector<RunSummary>& runs);

std::vector<RunSummary>
readManifest(const std::filesystem::path& path);

/// Aligned text table of run summaries.
void
printSummaryTable(const std::vector<RunSummary>& runs, std::ostream& os);

} // namespace iotsim
