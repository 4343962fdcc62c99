#include "vpop/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_set>

#include "parallel.hpp"
#include "vpop/errors.hpp"

namespace vpop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void format_double(char* buf, std::size_t n, double v) {
  std::snprintf(buf, n, "%.17g", v);
}

bool needs_powerlaw(Method m) {
  return m == Method::interarrival || m == Method::social || m == Method::combined;
}

bool needs_graph(Method m) {
  return m == Method::social || m == Method::combined;
}

}  // namespace

double MethodSeries::average() const {
  if (periods.empty()) return kNaN;
  double sum = 0.0;
  for (const auto& p : periods) sum += p.hit_rate;
  return sum / static_cast<double>(periods.size());
}

const MethodSeries* HitRateReport::find(Method m, std::uint32_t k) const {
  for (const auto& s : series) {
    if (s.method == m && s.k == k) return &s;
  }
  return nullptr;
}

bool HitRateReport::has_method(Method m) const {
  for (const auto& s : series) {
    if (s.method == m) return true;
  }
  return false;
}

double HitRateReport::method_mean(Method m) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : series) {
    if (s.method != m || s.periods.empty()) continue;
    sum += s.average();
    ++n;
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

double hit_rate(const CacheDecision& decision, const TraceView& actual) {
  if (actual.empty()) return kNaN;
  std::unordered_set<VideoId> cached(decision.videos.begin(), decision.videos.end());
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  for (const auto& tx : actual.events()) {
    ++total;
    if (cached.count(tx.video)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

Trace connected_subset(const Trace& trace, std::uint32_t min_unique_users) {
  std::vector<bool> keep(trace.n_videos(), false);
  for (const auto& c : cascades(trace.full_view())) {
    if (c.unique_users() >= min_unique_users) keep[c.video] = true;
  }
  std::vector<Trace::KeyedEvent> events;
  for (const auto& tx : trace.transactions()) {
    if (keep[tx.video]) {
      events.push_back({trace.user_key(tx.user), trace.video_key(tx.video), tx.time});
    }
  }
  return Trace::from_events(std::move(events));
}

HitRateReport run_experiment(const Trace& input, const ExperimentConfig& cfg,
                             const ScoreSink& score_sink) {
  if (!(cfg.period > 0.0)) throw ConfigError("run_experiment: period must be positive");
  if (cfg.k_values.empty()) throw ConfigError("run_experiment: k_values empty");
  for (auto k : cfg.k_values) {
    if (k == 0) throw ConfigError("run_experiment: k values must be positive");
  }
  if (cfg.test.begin < cfg.train.end) {
    throw ConfigError("run_experiment: test span must not overlap training");
  }

  const Trace connected = cfg.connected_only
                              ? connected_subset(input, cfg.inference.min_unique_users)
                              : Trace();
  const Trace& trace = cfg.connected_only ? connected : input;

  HitRateReport report;
  report.fit_window_end = cfg.train.end;

  // Power law fitted once, on the training span only.
  {
    const TraceView train_view =
        trace.window(WindowSpec{cfg.train.end, cfg.train.length()});
    std::vector<double> samples;
    for (const auto& c : cascades(train_view)) {
      if (c.size() >= cfg.min_fit_views) {
        samples.push_back(mean_interarrival(c, cfg.clamp_resolution));
      }
    }
    report.powerlaw_samples = samples.size();
    if (samples.size() >= 2) {
      report.powerlaw = fit(samples);
      report.powerlaw_valid = true;
    }
  }

  std::vector<Method> active;
  for (Method m : cfg.methods) {
    if (needs_powerlaw(m) && !report.powerlaw_valid) {
      report.skipped.push_back(
          {m, "power-law fit unavailable (fewer than 2 qualifying training cascades)"});
      continue;
    }
    active.push_back(m);
  }

  // Graph snapshots on the relearn schedule, trained strictly on history.
  const bool want_graph =
      std::any_of(active.begin(), active.end(), [](Method m) { return needs_graph(m); });
  InferenceConfig inference = cfg.inference;
  if (report.powerlaw_valid) inference.incubation = report.powerlaw;
  std::vector<RelearnInstant> schedule;
  std::vector<TransmissionGraph> graphs;
  if (want_graph && cfg.test.end > cfg.test.begin) {
    schedule = inference_schedule(cfg.test.begin, cfg.test.end, inference);
    graphs.reserve(schedule.size());
    for (const auto& instant : schedule) {
      const TraceView history = trace.window(instant.history);
      const auto training = valid_inference_cascades(history, inference);
      graphs.push_back(infer_graph(trace.n_users(), training, inference, cfg.jobs));
    }
  }

  const auto n_periods = static_cast<std::size_t>(
      std::floor((cfg.test.end - cfg.test.begin) / cfg.period + 1e-9));
  report.total_periods = static_cast<std::uint32_t>(n_periods);

  struct PeriodOutput {
    bool empty = true;
    std::uint64_t requests = 0;
    // per (active method, k): hit rate
    std::vector<std::vector<double>> hit;
    double graph_time = kNaN;
  };
  std::vector<PeriodOutput> outputs(n_periods);

  auto run_period = [&](std::size_t pi) {
    const double t = cfg.test.begin + static_cast<double>(pi) * cfg.period;
    PeriodOutput& out = outputs[pi];
    const TraceView actual = trace.window(WindowSpec{t + cfg.period, cfg.period});
    out.requests = actual.size();
    if (actual.empty()) return;
    out.empty = false;
    out.hit.assign(active.size(), std::vector<double>(cfg.k_values.size(), 0.0));

    const TraceView consensus_view = trace.window(WindowSpec{t, cfg.baseline.window});
    const TraceView social_view = trace.window(WindowSpec{t, cfg.social_window});

    const TransmissionGraph* graph = nullptr;
    if (!schedule.empty()) {
      std::size_t gi = 0;
      while (gi + 1 < schedule.size() && schedule[gi + 1].time <= t) ++gi;
      graph = &graphs[gi];
      out.graph_time = schedule[gi].time;
    }

    ScoreVector base_crf;
    bool have_crf = false;
    auto baseline_scores = [&]() -> const ScoreVector& {
      if (!have_crf) {
        base_crf = crf_score(consensus_view, cfg.baseline, t);
        have_crf = true;
      }
      return base_crf;
    };

    for (std::size_t mi = 0; mi < active.size(); ++mi) {
      const Method m = active[mi];
      ScoreVector sv;
      const ScoreVector* fallback = nullptr;
      switch (m) {
        case Method::baseline:
          sv = baseline_scores();
          break;
        case Method::viralness:
          sv = viral_score(consensus_view, cfg.viralness, t, cfg.clamp_resolution);
          fallback = &baseline_scores();
          break;
        case Method::interarrival:
          sv = interarrival_score(consensus_view, report.powerlaw, cfg.baseline, t,
                                  cfg.clamp_resolution);
          break;
        case Method::social:
          sv = diffusion_score(social_view, *graph, report.powerlaw, t,
                               cfg.clamp_resolution);
          break;
        case Method::combined:
          sv = combined_score(social_view, consensus_view, *graph, report.powerlaw,
                              cfg.baseline, cfg.combine, t, cfg.clamp_resolution);
          break;
      }
      if (score_sink) score_sink(m, t, sv);
      for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
        const CacheDecision decision =
            fallback ? top_k_with_fallback(sv, *fallback, cfg.k_values[ki])
                     : top_k(sv, cfg.k_values[ki]);
        out.hit[mi][ki] = hit_rate(decision, actual);
      }
    }
  };

  if (score_sink) {
    for (std::size_t pi = 0; pi < n_periods; ++pi) run_period(pi);
  } else {
    detail::parallel_for(n_periods, cfg.jobs, run_period);
  }

  // deterministic assembly: method-major, ascending k, periods in order
  for (std::size_t mi = 0; mi < active.size(); ++mi) {
    for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
      MethodSeries series;
      series.method = active[mi];
      series.k = cfg.k_values[ki];
      for (std::size_t pi = 0; pi < n_periods; ++pi) {
        const PeriodOutput& out = outputs[pi];
        if (out.empty) continue;
        const double t = cfg.test.begin + static_cast<double>(pi) * cfg.period;
        series.periods.push_back(PeriodResult{
            t, out.requests, out.hit[mi][ki], t,
            needs_graph(active[mi]) ? out.graph_time : kNaN});
      }
      report.series.push_back(std::move(series));
    }
  }
  report.empty_periods = 0;
  for (const auto& out : outputs) {
    if (out.empty) ++report.empty_periods;
  }
  return report;
}

double improvement(const HitRateReport& report, Method a, Method b) {
  const double mean_a = report.method_mean(a);
  const double mean_b = report.method_mean(b);
  if (std::isnan(mean_a) || std::isnan(mean_b)) {
    throw DataError(std::string("improvement: method missing from report (") +
                    method_name(a) + " vs " + method_name(b) + ")");
  }
  if (mean_a == 0.0) throw DataError("improvement: reference mean hit rate is zero");
  return 100.0 * (mean_b - mean_a) / mean_a;
}

void write_period_csv(std::ostream& out, const HitRateReport& report,
                      std::string_view config_hash) {
  char buf[40];
  out << "# config_hash=" << config_hash << '\n';
  if (report.powerlaw_valid) {
    format_double(buf, sizeof buf, report.powerlaw.alpha);
    out << "# powerlaw alpha=" << buf;
    format_double(buf, sizeof buf, report.powerlaw.t_min);
    out << " t_min=" << buf << " samples=" << report.powerlaw_samples << '\n';
  }
  for (const auto& s : report.skipped) {
    out << "# skipped method=" << method_name(s.method) << " reason=" << s.reason << '\n';
  }
  out << "# empty_periods=" << report.empty_periods << " of " << report.total_periods << '\n';
  out << "method,k,period_start,hit_rate\n";
  for (const auto& s : report.series) {
    for (const auto& p : s.periods) {
      out << method_name(s.method) << ',' << s.k << ',';
      format_double(buf, sizeof buf, p.period_start);
      out << buf << ',';
      format_double(buf, sizeof buf, p.hit_rate);
      out << buf << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const HitRateReport& report,
                       std::string_view config_hash) {
  char buf[40];
  out << "# config_hash=" << config_hash << '\n';
  if (report.powerlaw_valid) {
    format_double(buf, sizeof buf, report.powerlaw.alpha);
    out << "# powerlaw alpha=" << buf;
    format_double(buf, sizeof buf, report.powerlaw.t_min);
    out << " t_min=" << buf << " samples=" << report.powerlaw_samples << '\n';
  }
  for (const auto& s : report.skipped) {
    out << "# skipped method=" << method_name(s.method) << " reason=" << s.reason << '\n';
  }
  // pairwise improvements over the mean-across-k averages
  std::vector<Method> methods;
  for (const auto& s : report.series) {
    if (!s.periods.empty() &&
        std::find(methods.begin(), methods.end(), s.method) == methods.end()) {
      methods.push_back(s.method);
    }
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      const double base = report.method_mean(methods[i]);
      if (!(base > 0.0)) continue;
      std::snprintf(buf, sizeof buf, "%.4f", improvement(report, methods[i], methods[j]));
      out << "# improvement " << method_name(methods[i]) << "->"
          << method_name(methods[j]) << "=" << buf << "%\n";
    }
  }
  out << "method,k,avg_hit_rate\n";
  for (const auto& s : report.series) {
    if (s.periods.empty()) continue;
    format_double(buf, sizeof buf, s.average());
    out << method_name(s.method) << ',' << s.k << ',' << buf << '\n';
  }
}

void write_plot_data(std::ostream& out, const HitRateReport& report,
                     std::string_view config_hash) {
  std::vector<Method> methods;
  std::vector<std::uint32_t> ks;
  for (const auto& s : report.series) {
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end()) {
      methods.push_back(s.method);
    }
    if (std::find(ks.begin(), ks.end(), s.k) == ks.end()) ks.push_back(s.k);
  }
  std::sort(ks.begin(), ks.end());
  out << "# config_hash=" << config_hash << '\n';
  out << "# k";
  for (Method m : methods) out << ' ' << method_name(m);
  out << '\n';
  char buf[40];
  for (auto k : ks) {
    out << k;
    for (Method m : methods) {
      const MethodSeries* s = report.find(m, k);
      if (s && !s->periods.empty()) {
        format_double(buf, sizeof buf, s->average());
        out << ' ' << buf;
      } else {
        out << " nan";
      }
    }
    out << '\n';
  }
}

}  // namespace vpop
