// Drives the iot_arena binary end to end.

#include "doctest.h"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int
arena(const std::string& args)
{
  std::string cmd = std::string(IOT_ARENA_BIN) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace
{
  fs::path root;

  Workspace()
    : root(fs::temp_directory_path() / ("iot_arena_cli_" + std::to_string(::getpid())))
  {
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "tiny.json") << R"({
      "name": "tiny",
      "protocol": "coap-put-c",
      "topology": { "kind": "chain", "hops": 2, "p": 0.8 },
      "schedule": { "mode": "periodic", "interval_s": 5, "items_per_node": 10 },
      "seed": 5
    })";
    std::ofstream(root / "broken.json") << R"({"protocol": "coap-put-c", "schedule": {"interval_s": -1}})";
  }

  ~Workspace() { fs::remove_all(root); }

  std::string
  scenario(const char* name) const
  {
    return (root / name).string();
  }
};

} // namespace

TEST_CASE("run writes per-repetition outputs and a manifest")
{
  Workspace ws;
  fs::path out = ws.root / "a";
  REQUIRE(arena("run --scenario " + ws.scenario("tiny.json") + " --reps 3 --trace --out " + out.string()) == 0);

  for (int rep = 0; rep < 3; ++rep) {
    fs::path dir = out / "coap-put-c" / "tiny" / std::to_string(rep);
    CAPTURE(dir.string());
    for (const char* f : { "ttc.csv", "loss.csv", "goodput.csv", "linkstress.csv", "energy.csv", "overhead.csv",
                           "topology.json", "trace.jsonl" }) {
      CHECK(fs::exists(dir / f));
    }
    std::string loss = slurp(dir / "loss.csv");
    CHECK(loss.substr(0, loss.find('\n')).find(',') != std::string::npos);
  }

  auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  REQUIRE(manifest.at("runs").size() == 3);
  CHECK(manifest["runs"][0]["seed"] == 5);
  CHECK(manifest["runs"][2]["seed"] == 7);

  CHECK(arena("summarize --in " + out.string()) == 0);
}

TEST_CASE("repeated and parallel invocations produce identical traces")
{
  Workspace ws;
  fs::path a = ws.root / "a", b = ws.root / "b";
  REQUIRE(arena("run --scenario " + ws.scenario("tiny.json") + " --reps 2 --trace --out " + a.string()) == 0);
  REQUIRE(arena("run --scenario " + ws.scenario("tiny.json") + " --reps 2 --trace --parallel 2 --out " +
                b.string()) == 0);
  for (const char* rep : { "0", "1" }) {
    fs::path rel = fs::path("coap-put-c") / "tiny" / rep;
    CHECK(slurp(a / rel / "trace.jsonl") == slurp(b / rel / "trace.jsonl"));
    CHECK(slurp(a / rel / "goodput.csv") == slurp(b / rel / "goodput.csv"));
  }
  CHECK(slurp(a / "coap-put-c/tiny/0/trace.jsonl") != slurp(a / "coap-put-c/tiny/1/trace.jsonl"));
}

TEST_CASE("protocol override and seed flag")
{
  Workspace ws;
  fs::path out = ws.root / "o";
  REQUIRE(arena("run --scenario " + ws.scenario("tiny.json") + " --protocol mqtt-q1 --seed 40 --out " +
                out.string()) == 0);
  CHECK(fs::exists(out / "mqtt-q1" / "tiny" / "0" / "loss.csv"));
  CHECK_FALSE(fs::exists(out / "mqtt-q1" / "tiny" / "0" / "trace.jsonl"));
  auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["runs"][0]["seed"] == 40);
}

TEST_CASE("configuration errors exit with status 1")
{
  Workspace ws;
  std::string out = " --out " + (ws.root / "x").string();
  CHECK(arena("run --scenario " + ws.scenario("broken.json") + out) == 1);
  CHECK(arena("run --scenario " + ws.scenario("missing.json") + out) == 1);
  CHECK(arena("run --scenario " + ws.scenario("tiny.json") + " --protocol smtp" + out) == 1);
  CHECK(arena("matrix --preset nonsense" + out) == 1);
  CHECK(arena("frobnicate") == 1);
  CHECK(arena("--help") == 0);
  CHECK(arena("run --scenario " + ws.scenario("tiny.json") + " --reps 0" + out) == 1);
}

TEST_CASE("output root falls back to the environment")
{
  Workspace ws;
  fs::path env = ws.root / "env";
  std::string scenario = ws.scenario("tiny.json");
  CHECK(arena("run --scenario " + scenario) == 1);
  int status = std::system(("IOT_ARENA_OUT=" + env.string() + " " + IOT_ARENA_BIN + " run --scenario " + scenario +
                            " >/dev/null 2>&1")
                             .c_str());
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(env / "manifest.json"));
}
