#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vpop/netinfer.hpp"
#include "vpop/powerlaw.hpp"
#include "vpop/trace.hpp"

namespace vpop {

enum class Method {
  baseline,      // combined recency/frequency (LRFU spectrum)
  viralness,     // growth-trend-scaled view rate
  interarrival,  // zipf prior x inter-arrival density
  social,        // diffusion over the inferred graph
  combined,      // social + inter-arrival mix
};

const char* method_name(Method m);
bool parse_method(const std::string& name, Method& out);

// Per-video scores at one prediction instant. Videos absent from the
// list have implicit score 0. Entries are sorted by ascending video id.
struct ScoreVector {
  double at = 0.0;
  Method method = Method::baseline;
  std::vector<std::pair<VideoId, double>> scores;

  double get(VideoId v) const;
  bool empty() const { return scores.empty(); }
};

struct BaselineConfig {
  double gamma = 0.1;             // recency-frequency tradeoff in [0, 1]
  double window = 28.0 * 3600.0;  // lookback seconds
  double zipf_exponent = 1.0;
};

struct ViralnessConfig {
  double f1 = 0.3;
  double f2 = 0.8;
  double f3 = 1.0;
  std::uint32_t min_views = 5;
  double min_span = 3.0 * 3600.0;  // seconds
};

struct CombineConfig {
  double beta = 0.7;     // social share of the mix
  bool sum_mode = false; // plain diffusion + |outside|*interarrival sum
};

// score(v) = sum over v's requests of (1/2)^(gamma * age_hours).
// gamma = 0 degenerates to the request count, large gamma to recency.
ScoreVector crf_score(const TraceView& view, const BaselineConfig& cfg, double at);

// Rank-based zipf probabilities: rank by descending score (ties by
// ascending id), weight 1/rank^s, normalized to sum 1.
ScoreVector zipf_from_rank(const ScoreVector& sv, double exponent);

// Views-per-second between the f1 and f3 percentiles, scaled by the
// growth trend ratio rho = R(f1,f3)/R(f1,f2). Cascades under min_views
// or min_span score 0 (the harness fills those slots from the baseline).
ScoreVector viral_score(const TraceView& view, const ViralnessConfig& cfg,
                        double at, double resolution);

// zipf(baseline rank) * density(elapsed since last view), normalized to
// sum 1 over the view's videos.
ScoreVector interarrival_score(const TraceView& view, const PowerLawParams& pl,
                               const BaselineConfig& cfg, double at,
                               double resolution);

// Expected new watchers: for each video, sum over susceptible graph
// users of 1 - prod over infected users of (1 - A * w(elapsed)).
// The view is the social lookback; graph must be finalized.
ScoreVector diffusion_score(const TraceView& view, const TransmissionGraph& graph,
                            const PowerLawParams& pl, double at, double resolution);

// beta * diffusion + (1 - beta) * |outside(v)| * interarrival, where
// outside(v) counts users absent from the graph support that have not
// watched v in the social view. sum_mode drops the beta weighting.
ScoreVector combined_score(const TraceView& social_view,
                           const TraceView& consensus_view,
                           const TransmissionGraph& graph, const PowerLawParams& pl,
                           const BaselineConfig& cfg, const CombineConfig& mix,
                           double at, double resolution);

// The k-video cache selected at one instant.
struct CacheDecision {
  double at = 0.0;
  std::vector<VideoId> videos;  // selection order

  bool contains(VideoId v) const;
};

// k highest-scoring videos; ties broken by ascending video id.
CacheDecision top_k(const ScoreVector& sv, std::size_t k);

// Positive-scoring primary videos first, then fallback-ranked videos
// for the remaining slots.
CacheDecision top_k_with_fallback(const ScoreVector& primary,
                                  const ScoreVector& fallback, std::size_t k);

// Debug dump: "video_key,score" lines, descending score.
void dump_scores(std::ostream& out, const ScoreVector& sv, const Trace& trace);

}  // namespace vpop
