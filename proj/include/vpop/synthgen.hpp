#pragma once

#include <cstdint>

#include "vpop/netinfer.hpp"
#include "vpop/powerlaw.hpp"
#include "vpop/trace.hpp"

namespace vpop {

// Ground truth for synthetic traces: a planted transmission graph plus
// an incubation law, spread under the susceptible-infected independent
// cascade model with uniform background noise.
struct PlantedWorld {
  TransmissionGraph graph;  // finalized; defines the user universe
  PowerLawParams incubation{2.5, 60.0};
  std::uint32_t n_videos = 0;
  // Expected cascades per hour. <= 0 seeds every video exactly once;
  // otherwise each video is independently seeded with probability
  // min(1, seed_rate * hours / n_videos).
  double seed_rate = 0.0;
  // Fraction of requests independent of diffusion, in [0, 1).
  double noise_rate = 0.0;
  std::uint64_t rng_seed = 0;
};

// Simulates every seeded video's cascade (single transmission attempt
// per edge per cascade, incubation sampled by inverse CDF) and overlays
// Poisson background requests so that on average noise_rate of all
// requests are noise. Each user appears at most once per video.
// Deterministic under rng_seed; user keys are "u<i>", video keys "v<i>".
Trace generate(const PlantedWorld& world, double duration);

// Synthetic user key for world user id i ("u<i>"), matching generate().
std::string world_user_key(UserId u);

// Graph builders for planted worlds. Probabilities are drawn uniformly
// from [p_min, p_max] with the given seed.
TransmissionGraph star_graph(std::uint32_t n_users, UserId hub, double p_min,
                             double p_max, std::uint64_t seed);
TransmissionGraph random_graph(std::uint32_t n_users, std::uint32_t n_edges,
                               double p_min, double p_max, std::uint64_t seed);
// Star plus extra random edges avoiding the star's own edges.
TransmissionGraph star_random_graph(std::uint32_t n_users, UserId hub,
                                    std::uint32_t extra_edges, double p_min,
                                    double p_max, std::uint64_t seed);
TransmissionGraph graph_from_edges(
    std::uint32_t n_users,
    const std::vector<std::tuple<UserId, UserId, double>>& edges);

}  // namespace vpop
