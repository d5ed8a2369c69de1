// Experiment runner: single scenarios, the protocol/scenario matrix, and
// manifest summaries.

#include "iotsim/output.hpp"
#include "iotsim/scenario.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace iotsim;

namespace {

constexpr const char* kStandardPresets[] = {
  "single-hop-50ms", "single-hop-5s", "single-hop-unscheduled",
  "multihop-5s",     "multihop-15s",  "multihop-30s",
};

struct Job
{
  ScenarioConfig config;
  int rep = 0;
  fs::path dir;
};

/// Runs all jobs on up to `parallel` threads; summaries come back in job order.
std::vector<RunSummary>
runJobs(const std::vector<Job>& jobs, const fs::path& root, int parallel, bool withTrace)
{
  std::vector<RunSummary> summaries(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex errorMutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        RunResult run = runExperiment(jobs[i].config);
        writeRunOutputs(run, root / jobs[i].dir, withTrace);
        RunSummary s = summarize(run);
        s.rep = jobs[i].rep;
        s.dir = jobs[i].dir.generic_string();
        summaries[i] = std::move(s);
      }
      catch (...) {
        std::lock_guard lock(errorMutex);
        if (!error) {
          error = std::current_exception();
        }
      }
    }
  };
  int threads = std::max(1, std::min<int>(parallel, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& th : pool) {
    th.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
  return summaries;
}

void
addReps(std::vector<Job>& jobs, ScenarioConfig config, std::uint64_t seed, int reps)
{
  for (int r = 0; r < reps; ++r) {
    Job job;
    job.config = config;
    job.config.seed = seed + static_cast<std::uint64_t>(r);
    job.rep = r;
    job.dir = fs::path(std::string(toString(config.protocol))) / config.name / std::to_string(r);
    jobs.push_back(std::move(job));
  }
}

fs::path
outputRoot(const std::string& flag)
{
  if (!flag.empty()) {
    return flag;
  }
  if (const char* env = std::getenv("IOT_ARENA_OUT")) {
    return env;
  }
  throw ConfigError("no output directory: pass --out or set IOT_ARENA_OUT");
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"IoT protocol simulator: NDN, HoPP, I-Not, CoAP and MQTT-SN over 802.15.4"};
  app.require_subcommand(1);

  std::string scenarioPath;
  std::string protocol;
  std::uint64_t seed = 0;
  int reps = 0;
  std::string out;
  int parallel = 1;
  bool withTrace = false;

  auto* run = app.add_subcommand("run", "Run one scenario for a number of repetitions");
  run->add_option("--scenario", scenarioPath, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Base seed; repetition r uses seed + r");
  run->add_option("--reps", reps, "Repetitions (overrides the scenario file)")->check(CLI::PositiveNumber);
  run->add_option("--protocol", protocol, "Override the scenario's protocol");
  run->add_option("--out", out, "Output directory (default: $IOT_ARENA_OUT)");
  run->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_flag("--trace", withTrace, "Also write trace.jsonl per run");

  std::string preset;
  std::string presetDir = IOT_ARENA_PRESET_DIR;
  std::uint32_t items = 0;
  auto* matrix = app.add_subcommand("matrix", "Run every protocol on every preset scenario");
  matrix->add_option("--preset", preset, "Scenario grid")->required()->check(CLI::IsMember({"paper"}));
  matrix->add_option("--presets-dir", presetDir, "Directory holding the preset JSON files");
  matrix->add_option("--out", out, "Output directory (default: $IOT_ARENA_OUT)");
  matrix->add_option("--reps", reps, "Repetitions per cell (default 1)")->check(CLI::PositiveNumber);
  matrix->add_option("--seed", seed, "Base seed");
  matrix->add_option("--items", items, "Items per producer (default: preset value)");
  matrix->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  matrix->add_flag("--trace", withTrace, "Also write trace.jsonl per run");

  std::string in;
  auto* summary = app.add_subcommand("summarize", "Print the summary table of an output directory");
  summary->add_option("--in", in, "Directory containing manifest.json")->required();

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  }
  catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*summary) {
      printSummaryTable(readManifest(fs::path(in) / "manifest.json"), std::cout);
      return 0;
    }

    fs::path root = outputRoot(out);
    std::vector<Job> jobs;
    if (*run) {
      ScenarioConfig config = loadScenario(scenarioPath);
      if (!protocol.empty()) {
        config.protocol = protocolFromString(protocol);
      }
      if (run->count("--seed") == 0) {
        seed = config.seed;
      }
      addReps(jobs, config, seed, reps > 0 ? reps : config.repetitions);
    }
    else {
      for (const char* name : kStandardPresets) {
        ScenarioConfig base = loadScenario((fs::path(presetDir) / (std::string(name) + ".json")).string());
        if (items > 0) {
          base.schedule.itemsPerNode = items;
        }
        for (Protocol p : kAllProtocols) {
          ScenarioConfig config = base;
          config.protocol = p;
          addReps(jobs, config, matrix->count("--seed") ? seed : base.seed, reps > 0 ? reps : 1);
        }
      }
    }
    auto summaries = runJobs(jobs, root, parallel, withTrace);
    writeManifest(root / "manifest.json", summaries);
    printSummaryTable(summaries, std::cout);
    return 0;
  }
  catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return 2;
  }
}
