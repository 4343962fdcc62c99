#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "vpop/errors.hpp"
#include "vpop/powerlaw.hpp"
#include "vpop/synthgen.hpp"

using namespace vpop;

TEST_CASE("zero-edge world yields exactly one seed view per video") {
  PlantedWorld world;
  world.graph = TransmissionGraph(10);
  world.graph.finalize();
  world.n_videos = 50;
  world.noise_rate = 0.0;
  world.rng_seed = 4;
  Trace t = generate(world, 3600.0);
  CHECK(t.size() == 50);
  CHECK(t.n_videos() == 50);
}

TEST_CASE("generation is deterministic under the seed") {
  PlantedWorld world;
  world.graph = random_graph(20, 60, 0.3, 0.8, 2);
  world.incubation = {2.5, 30.0};
  world.n_videos = 100;
  world.noise_rate = 0.25;
  world.rng_seed = 123;
  Trace a = generate(world, 50.0 * 3600.0);
  Trace b = generate(world, 50.0 * 3600.0);
  std::ostringstream sa, sb;
  a.serialize(sa);
  b.serialize(sb);
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(sa.str().empty());

  world.rng_seed = 124;
  Trace c = generate(world, 50.0 * 3600.0);
  std::ostringstream sc;
  c.serialize(sc);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("a certain edge with near-degenerate incubation fires at about t_min") {
  // alpha pushed high so incubation samples hug t_min
  PlantedWorld world;
  world.graph = graph_from_edges(2, {{0, 1, 1.0}});
  world.incubation = {45.0, 100.0};
  world.n_videos = 400;
  world.noise_rate = 0.0;
  world.rng_seed = 6;
  const double duration = 1e7;
  Trace t = generate(world, duration);

  UserId a = 0, b = 0;
  REQUIRE(t.find_user(world_user_key(0), a));
  REQUIRE(t.find_user(world_user_key(1), b));
  int seeded_at_a = 0;
  int spread_to_b = 0;
  for (const auto& c : cascades(t.full_view())) {
    REQUIRE(c.size() >= 1);
    if (c.events.front().user != a) continue;
    ++seeded_at_a;
    if (c.size() == 2) {
      ++spread_to_b;
      const double gap = c.events[1].time - c.events[0].time;
      CHECK(gap >= 100.0);
      CHECK(gap <= 130.0);  // quantile(45, 0.999...) stays near t_min
    }
  }
  CHECK(seeded_at_a > 100);
  // truncation at the duration edge is the only loss channel
  CHECK(spread_to_b >= seeded_at_a - 2);
}

TEST_CASE("each user appears at most once per cascade") {
  PlantedWorld world;
  world.graph = random_graph(15, 80, 0.4, 0.9, 8);
  world.incubation = {2.2, 50.0};
  world.n_videos = 120;
  world.noise_rate = 0.4;
  world.rng_seed = 77;
  Trace t = generate(world, 100.0 * 3600.0);
  std::set<std::pair<UserId, VideoId>> seen;
  for (const auto& tx : t.transactions()) {
    CHECK(seen.insert({tx.user, tx.video}).second);
  }
}

TEST_CASE("transmission frequency converges to the edge probability") {
  const double p_true = 0.4;
  PlantedWorld world;
  world.graph = graph_from_edges(2, {{0, 1, p_true}});
  world.incubation = {3.0, 1.0};
  world.n_videos = 3000;
  world.noise_rate = 0.0;
  world.rng_seed = 15;
  Trace t = generate(world, 1e6);
  UserId a = 0;
  REQUIRE(t.find_user(world_user_key(0), a));
  int seeded_at_a = 0;
  int transmitted = 0;
  for (const auto& c : cascades(t.full_view())) {
    if (c.events.front().user != a) continue;
    ++seeded_at_a;
    if (c.size() == 2) ++transmitted;
  }
  REQUIRE(seeded_at_a > 1000);
  const double freq = static_cast<double>(transmitted) / seeded_at_a;
  const double sigma = std::sqrt(p_true * (1 - p_true) / seeded_at_a);
  CHECK(std::abs(freq - p_true) <= 3.0 * sigma);
}

TEST_CASE("inter-infection gaps refit the incubation exponent") {
  // both directions certain: every cascade carries exactly one gap drawn
  // from the incubation law
  PlantedWorld world;
  world.graph = graph_from_edges(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  world.incubation = {2.5, 10.0};
  world.n_videos = 11000;
  world.noise_rate = 0.0;
  world.rng_seed = 31;
  Trace t = generate(world, 1e9);
  std::vector<double> gaps;
  for (const auto& c : cascades(t.full_view())) {
    if (c.size() == 2) gaps.push_back(c.events[1].time - c.events[0].time);
  }
  REQUIRE(gaps.size() >= 10000);
  PowerLawParams refit = fit(gaps);
  CHECK(std::abs(refit.alpha - 2.5) <= 0.05 * 2.5);
}

TEST_CASE("noise volume tracks the configured share") {
  // plenty of headroom: only 2 of 40 users take part in diffusion
  PlantedWorld world;
  world.graph = graph_from_edges(40, {{0, 1, 1.0}, {1, 0, 1.0}});
  world.incubation = {2.5, 10.0};
  world.n_videos = 4000;
  world.noise_rate = 0.3;
  world.rng_seed = 5;
  Trace noisy = generate(world, 1e8);
  world.noise_rate = 0.0;
  Trace clean = generate(world, 1e8);
  const double extra = static_cast<double>(noisy.size() - clean.size());
  const double share = extra / static_cast<double>(noisy.size());
  CHECK(share == doctest::Approx(0.3).epsilon(0.15));
}

TEST_CASE("seed_rate thins the seeded videos") {
  PlantedWorld world;
  world.graph = TransmissionGraph(5);
  world.graph.finalize();
  world.n_videos = 2000;
  world.seed_rate = 10.0;  // 10 cascades/hour over 50 h -> ~500 of 2000
  world.noise_rate = 0.0;
  world.rng_seed = 3;
  Trace t = generate(world, 50.0 * 3600.0);
  CHECK(t.size() > 350);
  CHECK(t.size() < 650);
}

TEST_CASE("world validation") {
  PlantedWorld world;
  world.graph = TransmissionGraph(2);
  world.graph.finalize();
  world.n_videos = 1;
  CHECK_THROWS_AS(generate(world, 0.0), ConfigError);
  world.noise_rate = 1.0;
  CHECK_THROWS_AS(generate(world, 10.0), ConfigError);
}
