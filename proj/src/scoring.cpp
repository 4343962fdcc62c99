#include "vpop/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "vpop/errors.hpp"

namespace vpop {

namespace {

// Ranking order shared by every scorer: descending score, ascending id.
bool rank_less(const std::pair<VideoId, double>& a, const std::pair<VideoId, double>& b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

void sort_by_video(std::vector<std::pair<VideoId, double>>& scores) {
  std::sort(scores.begin(), scores.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::baseline: return "baseline";
    case Method::viralness: return "viralness";
    case Method::interarrival: return "interarrival";
    case Method::social: return "social";
    case Method::combined: return "combined";
  }
  return "unknown";
}

bool parse_method(const std::string& name, Method& out) {
  for (Method m : {Method::baseline, Method::viralness, Method::interarrival,
                   Method::social, Method::combined}) {
    if (name == method_name(m)) {
      out = m;
      return true;
    }
  }
  return false;
}

double ScoreVector::get(VideoId v) const {
  auto it = std::lower_bound(scores.begin(), scores.end(), v,
                             [](const auto& e, VideoId id) { return e.first < id; });
  if (it == scores.end() || it->first != v) return 0.0;
  return it->second;
}

ScoreVector crf_score(const TraceView& view, const BaselineConfig& cfg, double at) {
  std::unordered_map<VideoId, double> acc;
  for (const auto& tx : view.events()) {
    const double age_hours = (at - tx.time) / 3600.0;
    acc[tx.video] += std::exp2(-cfg.gamma * age_hours);
  }
  ScoreVector sv{at, Method::baseline, {}};
  sv.scores.assign(acc.begin(), acc.end());
  sort_by_video(sv.scores);
  return sv;
}

ScoreVector zipf_from_rank(const ScoreVector& sv, double exponent) {
  ScoreVector out{sv.at, sv.method, sv.scores};
  if (out.scores.empty()) return out;
  std::sort(out.scores.begin(), out.scores.end(), rank_less);
  double total = 0.0;
  for (std::size_t rank = 1; rank <= out.scores.size(); ++rank) {
    const double w = std::pow(static_cast<double>(rank), -exponent);
    out.scores[rank - 1].second = w;
    total += w;
  }
  for (auto& [v, s] : out.scores) s /= total;
  sort_by_video(out.scores);
  return out;
}

ScoreVector viral_score(const TraceView& view, const ViralnessConfig& cfg,
                        double at, double resolution) {
  ScoreVector sv{at, Method::viralness, {}};
  for (const auto& c : cascades(view)) {
    double score = 0.0;
    if (c.size() >= cfg.min_views && c.span() >= cfg.min_span) {
      const double l1 = percentile_time(c, cfg.f1);
      const double l2 = percentile_time(c, cfg.f2);
      const double l3 = percentile_time(c, cfg.f3);
      const double n = static_cast<double>(c.size());
      const double views_13 = std::ceil(cfg.f3 * n) - std::ceil(cfg.f1 * n);
      const double views_12 = std::ceil(cfg.f2 * n) - std::ceil(cfg.f1 * n);
      const double full_rate = views_13 / clamp_gap(l3 - l1, resolution);
      const double early_rate = views_12 / clamp_gap(l2 - l1, resolution);
      if (early_rate > 0.0) {
        const double trend = full_rate / early_rate;
        score = trend * full_rate;
      }
    }
    sv.scores.emplace_back(c.video, score);
  }
  // cascades() already orders by video id
  return sv;
}

ScoreVector interarrival_score(const TraceView& view, const PowerLawParams& pl,
                               const BaselineConfig& cfg, double at,
                               double resolution) {
  ScoreVector sv{at, Method::interarrival, {}};
  if (view.empty()) return sv;
  const ScoreVector prior = zipf_from_rank(crf_score(view, cfg, at), cfg.zipf_exponent);

  // last view per video; events are time-sorted so the last write wins
  std::unordered_map<VideoId, double> last_seen;
  for (const auto& tx : view.events()) last_seen[tx.video] = tx.time;

  double total = 0.0;
  sv.scores.reserve(last_seen.size());
  for (const auto& [video, last] : last_seen) {
    const double density = pdf(pl, clamp_gap(at - last, resolution));
    const double numerator = prior.get(video) * density;
    sv.scores.emplace_back(video, numerator);
    total += numerator;
  }
  sort_by_video(sv.scores);
  for (auto& [v, s] : sv.scores) s /= total;
  return sv;
}

namespace {

struct Infections {
  // infection sets per view video, ascending video id
  std::vector<VideoId> videos;
  std::vector<std::vector<CascadeEvent>> infected;  // first request per user
};

Infections collect_infections(const TraceView& view) {
  Infections out;
  std::unordered_map<VideoId, std::size_t> slot;
  std::vector<std::unordered_set<UserId>> seen;
  for (const auto& tx : view.events()) {
    auto [it, inserted] = slot.emplace(tx.video, out.videos.size());
    if (inserted) {
      out.videos.push_back(tx.video);
      out.infected.emplace_back();
      seen.emplace_back();
    }
    if (seen[it->second].insert(tx.user).second) {
      out.infected[it->second].push_back({tx.user, tx.time});
    }
  }
  // order by video id, keeping infection lists aligned
  std::vector<std::size_t> order(out.videos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out.videos[a] < out.videos[b]; });
  Infections sorted;
  sorted.videos.reserve(order.size());
  sorted.infected.reserve(order.size());
  for (std::size_t i : order) {
    sorted.videos.push_back(out.videos[i]);
    sorted.infected.push_back(std::move(out.infected[i]));
  }
  return sorted;
}

}  // namespace

ScoreVector diffusion_score(const TraceView& view, const TransmissionGraph& graph,
                            const PowerLawParams& pl, double at, double resolution) {
  ScoreVector sv{at, Method::social, {}};
  const Infections inf = collect_infections(view);
  const std::uint32_t n_users = graph.n_users();

  // per-video scratch, reused across videos
  std::vector<double> survive(n_users, 1.0);
  std::vector<bool> is_infected(n_users, false);
  std::vector<UserId> touched;

  for (std::size_t vi = 0; vi < inf.videos.size(); ++vi) {
    const auto& infected = inf.infected[vi];
    for (const auto& e : infected) {
      if (e.user < n_users) is_infected[e.user] = true;
    }
    touched.clear();
    for (const auto& e : infected) {
      if (e.user >= n_users) continue;  // watcher outside the graph universe
      const double w = incubation_weight(pl, clamp_gap(at - e.time, resolution));
      for (const auto& edge : graph.out_edges(e.user)) {
        if (is_infected[edge.user]) continue;
        if (survive[edge.user] == 1.0) touched.push_back(edge.user);
        survive[edge.user] *= 1.0 - edge.prob * w;
      }
    }
    std::sort(touched.begin(), touched.end());
    double score = 0.0;
    for (UserId u : touched) {
      score += 1.0 - survive[u];
      survive[u] = 1.0;
    }
    for (const auto& e : infected) {
      if (e.user < n_users) is_infected[e.user] = false;
    }
    sv.scores.emplace_back(inf.videos[vi], score);
  }
  return sv;
}

ScoreVector combined_score(const TraceView& social_view,
                           const TraceView& consensus_view,
                           const TransmissionGraph& graph, const PowerLawParams& pl,
                           const BaselineConfig& cfg, const CombineConfig& mix,
                           double at, double resolution) {
  const ScoreVector social = diffusion_score(social_view, graph, pl, at, resolution);
  const ScoreVector inter = interarrival_score(consensus_view, pl, cfg, at, resolution);

  const std::uint32_t universe = social_view.trace().n_users();
  const auto& support = graph.support();
  std::uint32_t outside_support = 0;
  for (std::uint32_t u = 0; u < universe; ++u) {
    if (u >= support.size() || !support[u]) ++outside_support;
  }

  // watchers per video that sit outside the graph support
  std::unordered_map<VideoId, std::uint32_t> outside_watchers;
  {
    std::unordered_set<std::uint64_t> seen;
    for (const auto& tx : social_view.events()) {
      const bool in_support = tx.user < support.size() && support[tx.user];
      if (in_support) continue;
      const std::uint64_t key = (static_cast<std::uint64_t>(tx.video) << 32) | tx.user;
      if (seen.insert(key).second) ++outside_watchers[tx.video];
    }
  }

  std::vector<VideoId> videos;
  videos.reserve(social.scores.size() + inter.scores.size());
  for (const auto& [v, s] : social.scores) videos.push_back(v);
  for (const auto& [v, s] : inter.scores) videos.push_back(v);
  std::sort(videos.begin(), videos.end());
  videos.erase(std::unique(videos.begin(), videos.end()), videos.end());

  ScoreVector sv{at, Method::combined, {}};
  sv.scores.reserve(videos.size());
  for (VideoId v : videos) {
    auto it = outside_watchers.find(v);
    const double not_watched =
        static_cast<double>(outside_support - (it == outside_watchers.end() ? 0 : it->second));
    const double consensus_part = not_watched * inter.get(v);
    const double raw = mix.sum_mode
                           ? social.get(v) + consensus_part
                           : mix.beta * social.get(v) + (1.0 - mix.beta) * consensus_part;
    sv.scores.emplace_back(v, raw);
  }
  return sv;
}

bool CacheDecision::contains(VideoId v) const {
  return std::find(videos.begin(), videos.end(), v) != videos.end();
}

CacheDecision top_k(const ScoreVector& sv, std::size_t k) {
  std::vector<std::pair<VideoId, double>> ranked(sv.scores);
  std::sort(ranked.begin(), ranked.end(), rank_less);
  CacheDecision out{sv.at, {}};
  const std::size_t take = std::min(k, ranked.size());
  out.videos.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.videos.push_back(ranked[i].first);
  return out;
}

CacheDecision top_k_with_fallback(const ScoreVector& primary,
                                  const ScoreVector& fallback, std::size_t k) {
  std::vector<std::pair<VideoId, double>> ranked(primary.scores);
  std::sort(ranked.begin(), ranked.end(), rank_less);
  CacheDecision out{primary.at, {}};
  std::unordered_set<VideoId> chosen;
  for (const auto& [v, s] : ranked) {
    if (out.videos.size() >= k) break;
    if (s <= 0.0) break;  // ranked order: zeros from here on
    out.videos.push_back(v);
    chosen.insert(v);
  }
  if (out.videos.size() < k) {
    std::vector<std::pair<VideoId, double>> fill(fallback.scores);
    std::sort(fill.begin(), fill.end(), rank_less);
    for (const auto& [v, s] : fill) {
      if (out.videos.size() >= k) break;
      if (chosen.count(v)) continue;
      out.videos.push_back(v);
    }
  }
  return out;
}

void dump_scores(std::ostream& out, const ScoreVector& sv, const Trace& trace) {
  std::vector<std::pair<VideoId, double>> ranked(sv.scores);
  std::sort(ranked.begin(), ranked.end(), rank_less);
  out << "video_key,score\n";
  char buf[40];
  for (const auto& [v, s] : ranked) {
    std::snprintf(buf, sizeof buf, "%.17g", s);
    out << trace.video_key(v) << ',' << buf << '\n';
  }
}

}  // namespace vpop
