#include "doctest.h"

#include "iotsim/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace iotsim;
using namespace std::chrono_literals;

TEST_CASE("events fire in time order, ties in insertion order")
{
  Simulator sim;
  std::vector<int> order;
  sim.schedule(5ms, [&] { order.push_back(3); });
  sim.schedule(1ms, [&] { order.push_back(1); });
  sim.schedule(5ms, [&] { order.push_back(4); });
  sim.schedule(2ms, [&] { order.push_back(2); });
  sim.runUntil(SimTime{10ms});
  CHECK(order == std::vector<int>{1, 2, 3, 4});
  CHECK(sim.now() == SimTime{10ms});
}

TEST_CASE("cancelled events never fire")
{
  Simulator sim;
  int fired = 0;
  auto h = sim.schedule(1ms, [&] { ++fired; });
  CHECK(sim.isPending(h));
  CHECK(sim.cancel(h));
  CHECK_FALSE(sim.cancel(h));
  sim.runUntil(SimTime{2ms});
  CHECK(fired == 0);
}

TEST_CASE("handlers may schedule within the run horizon")
{
  Simulator sim;
  std::vector<SimTime> at;
  sim.schedule(1ms, [&] {
    at.push_back(sim.now());
    sim.schedule(1ms, [&] { at.push_back(sim.now()); });
    sim.schedule(10ms, [&] { at.push_back(sim.now()); });
  });
  sim.runUntil(SimTime{5ms});
  CHECK(at == std::vector<SimTime>{SimTime{1ms}, SimTime{2ms}});
  CHECK(sim.pendingCount() == 1);
  sim.runUntil(SimTime{20ms});
  CHECK(at.size() == 3);
}

TEST_CASE("scheduling into the past is rejected")
{
  Simulator sim;
  sim.runUntil(SimTime{5ms});
  CHECK_THROWS_AS(sim.scheduleAt(SimTime{1ms}, [] {}), std::invalid_argument);
  CHECK_THROWS_AS(sim.schedule(Duration{-1}, [] {}), std::invalid_argument);
}

TEST_CASE("named streams are reproducible and independent")
{
  RandomStreams a(42);
  RandomStreams b(42);
  Rng x = a.stream("mac", 3);
  Rng y = b.stream("mac", 3);
  for (int i = 0; i < 100; ++i) {
    CHECK(x.next() == y.next());
  }
  Rng other = a.stream("mac", 4);
  Rng same = a.stream("mac", 3);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    equal += other.next() == same.next() ? 1 : 0;
  }
  CHECK(equal == 0);
  CHECK(RandomStreams(1).stream("mac").next() != RandomStreams(2).stream("mac").next());
}

TEST_CASE("rng distributions")
{
  Rng rng(9);
  const int n = 100000;
  double sum = 0;
  double expSum = 0;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    expSum += rng.exponential(3.0);
    hits += rng.bernoulli(0.3) ? 1 : 0;
    Duration d = rng.uniformDuration(300us, 2000us);
    REQUIRE(d >= 300us);
    REQUIRE(d <= 2000us);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(expSum / n == doctest::Approx(3.0).epsilon(0.02));
  CHECK(static_cast<double>(hits) / n == doctest::Approx(0.3).epsilon(0.02));
}
