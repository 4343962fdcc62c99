#pragma once

#include <cstdint>
#include <string>

#include "vpop/harness.hpp"
#include "vpop/synthgen.hpp"

namespace vpop {

// Declarative run description accepted by the C API as a JSON document.
// Every field has a default; unknown keys are rejected. Times live in
// hours here and are converted to seconds at the core boundary.
struct RunConfig {
  std::string format = "csv";
  double train_hours = 60.0;
  double test_hours = 60.0;
  double period_hours = 1.0;
  std::vector<std::uint32_t> k_values{10, 25, 50, 100, 250, 500, 1000};
  std::vector<Method> methods{Method::baseline, Method::viralness,
                              Method::interarrival, Method::social,
                              Method::combined};
  bool connected_only = false;

  BaselineConfig baseline;     // baseline.window via window_hours
  ViralnessConfig viralness;   // min_span via min_span_hours
  InferenceConfig inference;   // history/relearn via *_hours
  CombineConfig combine;
  double social_window_hours = 16.0;
  double clamp_resolution = 1.0;
  std::uint32_t min_fit_views = 5;
  std::uint64_t rng_seed = 0;
  unsigned jobs = 1;
  std::string dump_scores_dir;  // empty disables per-period score dumps
};

// Throws ConfigError on malformed JSON, unknown keys or bad values.
// Empty input yields the defaults.
RunConfig parse_run_config(const std::string& json_text);

// Canonical text form; parse(canonical(c)) == c.
std::string canonical_run_config(const RunConfig& c);

// FNV-1a over the canonical form, as fixed-width hex.
std::string config_hash(const std::string& canonical_text);

ExperimentConfig to_experiment_config(const RunConfig& c, const Trace& trace);

// Planted-world description for the generator:
//   n_users, n_videos, seed_rate, noise_rate, rng_seed, duration_hours,
//   incubation{alpha, t_min}, graph{kind, ...} with kinds
//   star | random | star_random | edges.
struct WorldConfig {
  PlantedWorld world;
  double duration = 0.0;  // seconds
};
WorldConfig parse_world_config(const std::string& json_text);
std::string canonical_world_config(const std::string& json_text);

}  // namespace vpop
