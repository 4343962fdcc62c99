#include "vpop/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <unordered_set>
#include <utility>

#include "vpop/errors.hpp"

namespace vpop {

namespace {

// splitmix64-style mixing for independent derived streams
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1) + index;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct PendingInfection {
  double time;
  UserId user;
  bool operator>(const PendingInfection& other) const {
    if (time != other.time) return time > other.time;
    return user > other.user;
  }
};

// Single-attempt susceptible-infected spread of one video.
void simulate_cascade(const TransmissionGraph& graph, const PowerLawParams& incubation,
                      UserId seed_user, double seed_time, double duration,
                      std::mt19937_64& rng, std::vector<CascadeEvent>& out) {
  std::priority_queue<PendingInfection, std::vector<PendingInfection>,
                      std::greater<PendingInfection>>
      queue;
  std::unordered_set<UserId> infected;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  queue.push({seed_time, seed_user});
  while (!queue.empty()) {
    const PendingInfection next = queue.top();
    queue.pop();
    if (next.time >= duration) break;  // queue is time-ordered
    if (!infected.insert(next.user).second) continue;
    out.push_back({next.user, next.time});
    for (const auto& edge : graph.out_edges(next.user)) {
      if (infected.count(edge.user)) continue;
      if (unit(rng) < edge.prob) {
        const double incubation_gap = quantile(incubation, unit(rng));
        queue.push({next.time + incubation_gap, edge.user});
      }
    }
  }
}

}  // namespace

std::string world_user_key(UserId u) { return "u" + std::to_string(u); }

Trace generate(const PlantedWorld& world, double duration) {
  if (!(duration > 0.0)) throw ConfigError("generate: duration must be positive");
  if (!(world.noise_rate >= 0.0 && world.noise_rate < 1.0)) {
    throw ConfigError("generate: noise_rate must be in [0, 1)");
  }
  if (!world.graph.finalized()) throw ConfigError("generate: graph not finalized");
  const std::uint32_t n_users = world.graph.n_users();
  if (n_users == 0 || world.n_videos == 0) {
    throw ConfigError("generate: world needs users and videos");
  }

  const double hours = duration / 3600.0;
  const double seed_prob =
      world.seed_rate <= 0.0
          ? 1.0
          : std::min(1.0, world.seed_rate * hours / static_cast<double>(world.n_videos));

  std::vector<Trace::KeyedEvent> events;
  std::vector<std::unordered_set<UserId>> watchers(world.n_videos);
  std::vector<CascadeEvent> cascade;
  for (VideoId v = 0; v < world.n_videos; ++v) {
    std::mt19937_64 rng(mix_seed(world.rng_seed, 1, v));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) >= seed_prob) continue;
    std::uniform_int_distribution<UserId> pick_user(0, n_users - 1);
    const UserId seed_user = pick_user(rng);
    const double seed_time = unit(rng) * duration;
    cascade.clear();
    simulate_cascade(world.graph, world.incubation, seed_user, seed_time, duration, rng,
                     cascade);
    const std::string video_key = "v" + std::to_string(v);
    for (const auto& e : cascade) {
      events.push_back({world_user_key(e.user), video_key, e.time});
      watchers[v].insert(e.user);
    }
  }

  // Background requests, sized so noise_rate of all requests are noise on
  // average. Draws colliding with an existing (user, video) pair are
  // redrawn to keep one view per user per cascade.
  const std::size_t diffusion_count = events.size();
  if (world.noise_rate > 0.0 && diffusion_count > 0) {
    std::mt19937_64 rng(mix_seed(world.rng_seed, 2, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<UserId> pick_user(0, n_users - 1);
    std::uniform_int_distribution<VideoId> pick_video(0, world.n_videos - 1);
    const double mean_noise = static_cast<double>(diffusion_count) * world.noise_rate /
                              (1.0 - world.noise_rate);
    std::poisson_distribution<std::uint64_t> poisson(mean_noise);
    const std::uint64_t n_noise = poisson(rng);
    for (std::uint64_t i = 0; i < n_noise; ++i) {
      for (int attempt = 0; attempt < 16; ++attempt) {
        const UserId u = pick_user(rng);
        const VideoId v = pick_video(rng);
        if (!watchers[v].insert(u).second) continue;
        events.push_back({world_user_key(u), "v" + std::to_string(v), unit(rng) * duration});
        break;
      }
    }
  }

  return Trace::from_events(std::move(events));
}

TransmissionGraph star_graph(std::uint32_t n_users, UserId hub, double p_min,
                             double p_max, std::uint64_t seed) {
  if (hub >= n_users) throw ConfigError("star_graph: hub out of range");
  std::mt19937_64 rng(mix_seed(seed, 3, 0));
  std::uniform_real_distribution<double> prob(p_min, p_max);
  TransmissionGraph g(n_users);
  for (UserId leaf = 0; leaf < n_users; ++leaf) {
    if (leaf == hub) continue;
    SparseColumn col;
    col.entries.push_back({hub, prob(rng)});
    g.set_column(leaf, std::move(col));
  }
  g.finalize();
  return g;
}

namespace {

TransmissionGraph build_random(std::uint32_t n_users, std::uint32_t n_edges,
                               double p_min, double p_max, std::uint64_t seed,
                               const TransmissionGraph* base) {
  if (n_users < 2) throw ConfigError("random_graph: need at least 2 users");
  std::mt19937_64 rng(mix_seed(seed, 4, 0));
  std::uniform_real_distribution<double> prob(p_min, p_max);
  std::uniform_int_distribution<UserId> pick(0, n_users - 1);
  std::unordered_set<std::uint64_t> used;
  auto pair_key = [](UserId a, UserId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };
  std::vector<std::vector<SparseEntry>> incoming(n_users);
  if (base) {
    for (UserId target = 0; target < n_users; ++target) {
      for (const auto& e : base->column(target).entries) {
        incoming[target].push_back(e);
        used.insert(pair_key(e.user, target));
      }
    }
  }
  const std::uint64_t max_edges =
      static_cast<std::uint64_t>(n_users) * (n_users - 1) - used.size();
  std::uint32_t placed = 0;
  std::uint64_t attempts = 0;
  while (placed < n_edges && attempts < 1000ULL * n_edges + 1000ULL) {
    ++attempts;
    if (placed >= max_edges) break;
    const UserId src = pick(rng);
    const UserId dst = pick(rng);
    if (src == dst) continue;
    if (!used.insert(pair_key(src, dst)).second) continue;
    incoming[dst].push_back({src, prob(rng)});
    ++placed;
  }
  TransmissionGraph g(n_users);
  for (UserId target = 0; target < n_users; ++target) {
    if (incoming[target].empty()) continue;
    SparseColumn col;
    col.entries = std::move(incoming[target]);
    g.set_column(target, std::move(col));
  }
  g.finalize();
  return g;
}

}  // namespace

TransmissionGraph random_graph(std::uint32_t n_users, std::uint32_t n_edges,
                               double p_min, double p_max, std::uint64_t seed) {
  return build_random(n_users, n_edges, p_min, p_max, seed, nullptr);
}

TransmissionGraph star_random_graph(std::uint32_t n_users, UserId hub,
                                    std::uint32_t extra_edges, double p_min,
                                    double p_max, std::uint64_t seed) {
  TransmissionGraph star = star_graph(n_users, hub, p_min, p_max, seed);
  return build_random(n_users, extra_edges, p_min, p_max, seed + 1, &star);
}

TransmissionGraph graph_from_edges(
    std::uint32_t n_users,
    const std::vector<std::tuple<UserId, UserId, double>>& edges) {
  std::vector<std::vector<SparseEntry>> incoming(n_users);
  for (const auto& [src, dst, prob] : edges) {
    if (dst >= n_users) throw ConfigError("graph_from_edges: target out of range");
    incoming[dst].push_back({src, prob});
  }
  TransmissionGraph g(n_users);
  for (UserId target = 0; target < n_users; ++target) {
    if (incoming[target].empty()) continue;
    SparseColumn col;
    col.entries = std::move(incoming[target]);
    g.set_column(target, std::move(col));
  }
  g.finalize();
  return g;
}

}  // namespace vpop
