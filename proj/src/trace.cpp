#include "vpop/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "vpop/errors.hpp"

namespace vpop {

namespace {

// %.17g round-trips doubles exactly and keeps integers short.
void format_double(char* buf, std::size_t n, double v) {
  std::snprintf(buf, n, "%.17g", v);
}

bool parse_time(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* begin = field.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end != begin + field.size()) return false;
  return std::isfinite(out) && out >= 0.0;
}

struct RawEvent {
  double time;
  std::string user_key;
  std::string video_key;
};

std::vector<RawEvent> parse_canonical(std::istream& in) {
  std::vector<RawEvent> events;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos) {
      throw ParseError("expected timestamp,user_key,video_key", line_no);
    }
    RawEvent ev;
    if (!parse_time(line.substr(0, c1), ev.time)) {
      throw ParseError("bad timestamp '" + line.substr(0, c1) + "'", line_no);
    }
    ev.user_key = line.substr(c1 + 1, c2 - c1 - 1);
    ev.video_key = line.substr(c2 + 1);
    if (ev.user_key.empty() || ev.video_key.empty()) {
      throw ParseError("empty key", line_no);
    }
    events.push_back(std::move(ev));
  }
  return events;
}

// Campus-trace layout: whitespace-separated, at least five fields:
// timestamp, server, client, request type, video id, [...]. Client maps
// to the user key and the video-id field to the video key. Anything that
// does not fit is skipped and counted.
std::vector<RawEvent> parse_umass(std::istream& in, std::uint64_t& skipped) {
  std::vector<RawEvent> events;
  std::string line;
  skipped = 0;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    fields.clear();
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.size() < 5) {
      if (!fields.empty()) ++skipped;
      continue;
    }
    RawEvent ev;
    if (!parse_time(fields[0], ev.time) || fields[4] == "-") {
      ++skipped;
      continue;
    }
    ev.user_key = fields[2];
    ev.video_key = fields[4];
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace

std::size_t Cascade::unique_users() const {
  std::vector<UserId> users;
  users.reserve(events.size());
  for (const auto& e : events) users.push_back(e.user);
  std::sort(users.begin(), users.end());
  return static_cast<std::size_t>(
      std::unique(users.begin(), users.end()) - users.begin());
}

double Cascade::span() const {
  if (events.size() < 2) return 0.0;
  return events.back().time - events.front().time;
}

TraceFormat parse_trace_format(const std::string& name) {
  if (name == "csv") return TraceFormat::canonical_csv;
  if (name == "umass") return TraceFormat::umass_youtube;
  throw ConfigError("unknown trace format '" + name + "' (expected csv or umass)");
}

Trace Trace::ingest(std::istream& in, TraceFormat format) {
  std::uint64_t skipped = 0;
  std::vector<RawEvent> raw = format == TraceFormat::canonical_csv
                                  ? parse_canonical(in)
                                  : parse_umass(in, skipped);
  std::vector<KeyedEvent> events;
  events.reserve(raw.size());
  for (auto& ev : raw) {
    events.push_back({std::move(ev.user_key), std::move(ev.video_key), ev.time});
  }
  Trace t = from_events(std::move(events));
  t.skipped_lines_ = skipped;
  return t;
}

Trace Trace::from_events(std::vector<KeyedEvent> events) {
  for (const auto& ev : events) {
    if (!std::isfinite(ev.time) || ev.time < 0.0) {
      throw DataError("trace event time must be finite and non-negative");
    }
    if (ev.user_key.empty() || ev.video_key.empty()) {
      throw DataError("trace event keys must be non-empty");
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const KeyedEvent& a, const KeyedEvent& b) { return a.time < b.time; });
  Trace t;
  t.transactions_.reserve(events.size());
  for (const auto& ev : events) {
    auto [uit, uinserted] =
        t.user_ids_.emplace(ev.user_key, static_cast<UserId>(t.user_keys_.size()));
    if (uinserted) t.user_keys_.push_back(ev.user_key);
    auto [vit, vinserted] =
        t.video_ids_.emplace(ev.video_key, static_cast<VideoId>(t.video_keys_.size()));
    if (vinserted) t.video_keys_.push_back(ev.video_key);
    t.transactions_.push_back({uit->second, vit->second, ev.time});
  }
  return t;
}

double Trace::origin() const {
  return transactions_.empty() ? 0.0 : transactions_.front().time;
}

double Trace::end_time() const {
  return transactions_.empty() ? 0.0 : transactions_.back().time;
}

bool Trace::find_user(const std::string& key, UserId& out) const {
  auto it = user_ids_.find(key);
  if (it == user_ids_.end()) return false;
  out = it->second;
  return true;
}

bool Trace::find_video(const std::string& key, VideoId& out) const {
  auto it = video_ids_.find(key);
  if (it == video_ids_.end()) return false;
  out = it->second;
  return true;
}

TraceView Trace::window(const WindowSpec& spec) const {
  auto lo = std::lower_bound(transactions_.begin(), transactions_.end(), spec.begin(),
                             [](const Transaction& t, double v) { return t.time < v; });
  auto hi = std::lower_bound(lo, transactions_.end(), spec.end,
                             [](const Transaction& t, double v) { return t.time < v; });
  return TraceView(this, static_cast<std::size_t>(lo - transactions_.begin()),
                   static_cast<std::size_t>(hi - transactions_.begin()), spec);
}

TraceView Trace::full_view() const {
  WindowSpec all{transactions_.empty() ? 0.0 : std::nextafter(end_time(), end_time() + 1.0),
                 std::numeric_limits<double>::infinity()};
  return TraceView(this, 0, transactions_.size(), all);
}

void Trace::serialize(std::ostream& out) const {
  char buf[40];
  for (const auto& tx : transactions_) {
    format_double(buf, sizeof buf, tx.time);
    out << buf << ',' << user_keys_[tx.user] << ',' << video_keys_[tx.video] << '\n';
  }
}

std::span<const Transaction> TraceView::events() const {
  if (!trace_) return {};
  return std::span<const Transaction>(trace_->transactions_).subspan(first_, last_ - first_);
}

std::vector<UserId> TraceView::distinct_users() const {
  std::vector<UserId> out;
  out.reserve(size());
  for (const auto& tx : events()) out.push_back(tx.user);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<VideoId> TraceView::distinct_videos() const {
  std::vector<VideoId> out;
  out.reserve(size());
  for (const auto& tx : events()) out.push_back(tx.video);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TraceView TraceView::window(const WindowSpec& spec) const {
  if (!trace_) return {};
  auto ev = events();
  auto lo = std::lower_bound(ev.begin(), ev.end(), spec.begin(),
                             [](const Transaction& t, double v) { return t.time < v; });
  auto hi = std::lower_bound(lo, ev.end(), spec.end,
                             [](const Transaction& t, double v) { return t.time < v; });
  return TraceView(trace_, first_ + static_cast<std::size_t>(lo - ev.begin()),
                   first_ + static_cast<std::size_t>(hi - ev.begin()), spec);
}

std::vector<Cascade> cascades(const TraceView& view) {
  std::unordered_map<VideoId, std::size_t> slots;
  std::vector<Cascade> out;
  for (const auto& tx : view.events()) {
    auto [it, inserted] = slots.emplace(tx.video, out.size());
    if (inserted) {
      out.push_back(Cascade{tx.video, {}});
    }
    out[it->second].events.push_back({tx.user, tx.time});
  }
  std::sort(out.begin(), out.end(),
            [](const Cascade& a, const Cascade& b) { return a.video < b.video; });
  return out;
}

double percentile_time(const Cascade& c, double f) {
  if (c.empty()) throw std::domain_error("percentile_time: empty cascade");
  if (!(f >= 0.0 && f <= 1.0)) throw std::domain_error("percentile_time: f outside [0,1]");
  if (f == 0.0) return c.events.front().time;
  const double n = static_cast<double>(c.events.size());
  auto idx = static_cast<std::size_t>(std::ceil(f * n));
  idx = std::min(idx, c.events.size());  // guard against ceil overshoot
  return c.events[idx - 1].time;
}

Cascade prefix(const Cascade& c, double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::domain_error("prefix: f outside [0,1]");
  const double n = static_cast<double>(c.events.size());
  auto take = static_cast<std::size_t>(std::ceil(f * n));
  take = std::min(take, c.events.size());
  Cascade out{c.video, {}};
  out.events.assign(c.events.begin(), c.events.begin() + static_cast<std::ptrdiff_t>(take));
  return out;
}

}  // namespace vpop
