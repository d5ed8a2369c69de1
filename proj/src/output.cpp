#include "iotsim/output.hpp"

#include "json.hpp"

#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

namespace iotsim {

using json = nlohmann::ordered_json;

namespace {

std::ofstream
openOut(const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << std::setprecision(10);
  return out;
}

} // namespace

std::string
configHash(const ScenarioConfig& config)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : scenarioToJson(config)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

RunSummary
summarize(const RunResult& run)
{
  const ScenarioConfig& c = run.config;
  RunSummary s;
  s.protocol = std::string(toString(c.protocol));
  s.scenario = c.name;
  s.seed = c.seed;
  s.configHash = configHash(c);
  LossSummary loss = lossSummary(run.trace);
  s.published = loss.published;
  s.delivered = loss.delivered;
  s.lossRate = loss.rate();
  std::vector<double> ttc;
  for (const TtcSample& t : ttcSamples(run.trace)) {
    ttc.push_back(toSeconds(t.ttc()) * 1e3);
  }
  if (!ttc.empty()) {
    s.ttcMeanMs = std::accumulate(ttc.begin(), ttc.end(), 0.0) / static_cast<double>(ttc.size());
    s.ttcMedianMs = quantile(ttc, 0.5);
  }
  Duration interval = c.schedule.mode == ScheduleSpec::Mode::Periodic ? c.schedule.interval
                                                                      : (c.schedule.lo + c.schedule.hi) / 2;
  s.goodputOptimum = goodputOptimum(run.topology.producers().size(), c.sizing.payloadBytes, interval);
  s.goodputMean = goodput(run.trace, c.goodputWindow, s.goodputOptimum).mean();
  Overhead o = controlOverhead(run.trace, run.topology.sink);
  s.byteOverhead = o.byteRatio();
  s.frameOverhead = o.frameRatio();
  s.requestsPerItem = o.requestsPerItem();
  return s;
}

void
writeTtcCsv(const std::vector<TtcSample>& samples, std::ostream& os)
{
  os << "item_id,producer,publish_t,deliver_t,ttc_us\n";
  for (const TtcSample& s : samples) {
    os << toString(s.item) << ',' << s.item.producer << ',' << s.publish.count() << ','
       << s.deliver.count() << ',' << s.ttc().count() << '\n';
  }
}

void
writeLossCsv(const LossSummary& loss, std::ostream& os)
{
  os << "published,delivered,lost,loss_rate\n"
     << loss.published << ',' << loss.delivered << ',' << loss.lost() << ',' << loss.rate() << '\n';
}

void
writeGoodputCsv(const GoodputSeries& series, std::ostream& os)
{
  os << "window_start,bytes_per_s,optimum\n";
  for (const GoodputWindow& w : series.windows) {
    os << w.start.count() << ',' << w.bytesPerSecond << ',' << series.optimum << '\n';
  }
}

void
writeLinkStressCsv(const std::vector<LinkStressPoint>& points, std::ostream& os)
{
  os << "traversals,shortest,multiplicity,delivered\n";
  for (const LinkStressPoint& p : points) {
    os << p.traversals << ',' << p.shortest << ',' << p.multiplicity << ',' << (p.delivered ? 1 : 0)
       << '\n';
  }
}

void
writeEnergyCsv(const std::vector<EnergyPoint>& points, std::ostream& os)
{
  os << "node,window_start,mJ,cumulative_mJ\n";
  for (const EnergyPoint& p : points) {
    os << p.node << ',' << p.windowStart.count() << ',' << p.windowMj << ',' << p.cumulativeMj << '\n';
  }
}

void
writeOverheadCsv(const Overhead& o, std::ostream& os)
{
  os << "control_bytes,payload_bytes,byte_ratio,control_frames,payload_frames,frame_ratio,"
        "requests,delivered_items,requests_per_item\n"
     << o.controlBytes << ',' << o.payloadBytes << ',' << o.byteRatio() << ',' << o.controlFrames
     << ',' << o.payloadFrames << ',' << o.frameRatio() << ',' << o.requests << ','
     << o.deliveredItems << ',' << o.requestsPerItem() << '\n';
}

std::string
topologyJson(const RunResult& run)
{
  json j;
  j["sink"] = run.topology.sink;
  json nodes = json::array();
  for (NodeId v = 0; v < static_cast<NodeId>(run.topology.size()); ++v) {
    nodes.push_back({{"id", v},
                     {"x", run.topology.positions[v].x},
                     {"y", run.topology.positions[v].y},
                     {"rank", run.initialRanks[v]},
                     {"parent", run.initialParents[v]},
                     {"final_rank", run.tree.rank(v)},
                     {"final_parent", run.tree.parent(v)}});
  }
  j["nodes"] = nodes;
  json links = json::array();
  for (const Link& l : run.topology.links) {
    links.push_back({{"a", l.a}, {"b", l.b}, {"p", l.p}});
  }
  j["links"] = links;
  j["uplink_switches"] = run.uplinkSwitches;
  return j.dump(2);
}

void
writeRunOutputs(const RunResult& run, const std::filesystem::path& dir, bool withTrace)
{
  std::filesystem::create_directories(dir);
  const ScenarioConfig& c = run.config;
  Duration interval = c.schedule.mode == ScheduleSpec::Mode::Periodic ? c.schedule.interval
                                                                      : (c.schedule.lo + c.schedule.hi) / 2;
  double optimum = goodputOptimum(run.topology.producers().size(), c.sizing.payloadBytes, interval);
  PowerLevels power{c.energy.txMw, c.energy.rxMw, c.energy.idleMw};

  auto ttc = openOut(dir / "ttc.csv");
  writeTtcCsv(ttcSamples(run.trace), ttc);
  auto loss = openOut(dir / "loss.csv");
  writeLossCsv(lossSummary(run.trace), loss);
  auto gp = openOut(dir / "goodput.csv");
  writeGoodputCsv(goodput(run.trace, c.goodputWindow, optimum), gp);
  auto ls = openOut(dir / "linkstress.csv");
  writeLinkStressCsv(linkStress(run.trace, run.topology), ls);
  auto en = openOut(dir / "energy.csv");
  writeEnergyCsv(energy(run.trace, power), en);
  auto oh = openOut(dir / "overhead.csv");
  writeOverheadCsv(controlOverhead(run.trace, run.topology.sink), oh);
  auto topo = openOut(dir / "topology.json");
  topo << topologyJson(run) << '\n';
  if (withTrace) {
    auto tr = openOut(dir / "trace.jsonl");
    writeJsonLines(run.trace, tr);
  }
}

void
writeManifest(const std::filesystem::path& path, const std::vector<RunSummary>& runs)
{
  json j;
  json list = json::array();
  for (const RunSummary& s : runs) {
    list.push_back({{"protocol", s.protocol},
                    {"scenario", s.scenario},
                    {"rep", s.rep},
                    {"seed", s.seed},
                    {"config_hash", s.configHash},
                    {"dir", s.dir},
                    {"published", s.published},
                    {"delivered", s.delivered},
                    {"loss_rate", s.lossRate},
                    {"ttc_mean_ms", s.ttcMeanMs},
                    {"ttc_median_ms", s.ttcMedianMs},
                    {"goodput_mean", s.goodputMean},
                    {"goodput_optimum", s.goodputOptimum},
                    {"byte_overhead", s.byteOverhead},
                    {"frame_overhead", s.frameOverhead},
                    {"requests_per_item", s.requestsPerItem}});
  }
  j["runs"] = list;
  auto out = openOut(path);
  out << j.dump(2) << '\n';
}

std::vector<RunSummary>
readManifest(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  json j = json::parse(in);
  std::vector<RunSummary> runs;
  for (const json& r : j.at("runs")) {
    RunSummary s;
    s.protocol = r.at("protocol").get<std::string>();
    s.scenario = r.at("scenario").get<std::string>();
    s.rep = r.at("rep").get<int>();
    s.seed = r.at("seed").get<std::uint64_t>();
    s.configHash = r.at("config_hash").get<std::string>();
    s.dir = r.at("dir").get<std::string>();
    s.published = r.at("published").get<std::size_t>();
    s.delivered = r.at("delivered").get<std::size_t>();
    s.lossRate = r.at("loss_rate").get<double>();
    s.ttcMeanMs = r.at("ttc_mean_ms").get<double>();
    s.ttcMedianMs = r.at("ttc_median_ms").get<double>();
    s.goodputMean = r.at("goodput_mean").get<double>();
    s.goodputOptimum = r.at("goodput_optimum").get<double>();
    s.byteOverhead = r.at("byte_overhead").get<double>();
    s.frameOverhead = r.at("frame_overhead").get<double>();
    s.requestsPerItem = r.at("requests_per_item").get<double>();
    runs.push_back(std::move(s));
  }
  return runs;
}

void
printSummaryTable(const std::vector<RunSummary>& runs, std::ostream& os)
{
  os << std::left << std::setw(12) << "protocol" << std::setw(24) << "scenario" << std::right
     << std::setw(4) << "rep" << std::setw(9) << "deliv%" << std::setw(12) << "ttc_mean"
     << std::setw(12) << "ttc_med" << std::setw(11) << "goodput" << std::setw(10) << "ovh_B"
     << std::setw(9) << "req/it" << '\n';
  os << std::fixed;
  for (const RunSummary& s : runs) {
    os << std::left << std::setw(12) << s.protocol << std::setw(24) << s.scenario << std::right
       << std::setw(4) << s.rep << std::setw(9) << std::setprecision(2) << 100.0 * (1.0 - s.lossRate)
       << std::setw(10) << std::setprecision(1) << s.ttcMeanMs << "ms" << std::setw(10)
       << s.ttcMedianMs << "ms" << std::setw(11) << std::setprecision(2) << s.goodputMean
       << std::setw(10) << s.byteOverhead << std::setw(9) << s.requestsPerItem << '\n';
  }
  os << std::defaultfloat;
}

} // namespace iotsim
