#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "vpop/netinfer.hpp"
#include "vpop/scoring.hpp"
#include "vpop/trace.hpp"

namespace vpop {

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
  double length() const { return end - begin; }
};

struct ExperimentConfig {
  TimeInterval train;
  TimeInterval test;
  double period = 3600.0;
  std::vector<std::uint32_t> k_values{10, 25, 50, 100, 250, 500, 1000};
  std::vector<Method> methods{Method::baseline, Method::viralness,
                              Method::interarrival, Method::social,
                              Method::combined};
  bool connected_only = false;

  BaselineConfig baseline;
  ViralnessConfig viralness;
  InferenceConfig inference;
  CombineConfig combine;
  double social_window = 16.0 * 3600.0;
  double clamp_resolution = 1.0;
  std::uint32_t min_fit_views = 5;  // cascade length floor for the power-law fit
  unsigned jobs = 1;
};

struct PeriodResult {
  double period_start = 0.0;
  std::uint64_t requests = 0;
  double hit_rate = 0.0;
  // leakage audit: inputs used to build this period's scores
  double score_window_end = 0.0;
  double graph_time = 0.0;  // NaN when the method uses no graph
};

struct MethodSeries {
  Method method = Method::baseline;
  std::uint32_t k = 0;
  std::vector<PeriodResult> periods;  // request-bearing periods only

  double average() const;  // mean hit rate; NaN when empty
};

struct SkippedMethod {
  Method method;
  std::string reason;
};

struct HitRateReport {
  std::vector<MethodSeries> series;  // method-major, then ascending k
  std::vector<SkippedMethod> skipped;
  std::uint32_t empty_periods = 0;
  std::uint32_t total_periods = 0;

  bool powerlaw_valid = false;
  PowerLawParams powerlaw;
  std::uint64_t powerlaw_samples = 0;
  double fit_window_end = 0.0;

  const MethodSeries* find(Method m, std::uint32_t k) const;
  bool has_method(Method m) const;
  // Mean over k of the per-k average hit rates; NaN if absent.
  double method_mean(Method m) const;
};

// Fraction of the period's requests served by the cached videos.
// Returns NaN for an empty period (excluded from averages upstream).
double hit_rate(const CacheDecision& decision, const TraceView& actual);

// Sub-trace of the cascades with >= min_unique_users distinct users,
// re-keyed through the original keys.
Trace connected_subset(const Trace& trace, std::uint32_t min_unique_users);

// Optional per-period score sink (debug dumps).
using ScoreSink = std::function<void(Method, double period_start, const ScoreVector&)>;

// Hourly train/test simulation: fits the power law on the training span,
// relearns the graph on the inference schedule, scores every test period
// with each method's prescribed window, and evaluates top-k hit rates.
// Everything scored at period t uses only data strictly before t.
HitRateReport run_experiment(const Trace& trace, const ExperimentConfig& cfg,
                             const ScoreSink& score_sink = nullptr);

// 100 * (mean_k avg_b - mean_k avg_a) / mean_k avg_a. Throws DataError
// when a method is missing or the reference mean is zero.
double improvement(const HitRateReport& report, Method a, Method b);

void write_period_csv(std::ostream& out, const HitRateReport& report,
                      std::string_view config_hash);
void write_summary_csv(std::ostream& out, const HitRateReport& report,
                       std::string_view config_hash);
// Gnuplot-friendly columns: k then one average-hit-rate column per method.
void write_plot_data(std::ostream& out, const HitRateReport& report,
                     std::string_view config_hash);

}  // namespace vpop
