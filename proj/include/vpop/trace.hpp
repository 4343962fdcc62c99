#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace vpop {

using UserId = std::uint32_t;
using VideoId = std::uint32_t;

// One video request. User and video ids are dense and assigned in
// first-appearance order over the whole (time-sorted) trace.
struct Transaction {
  UserId user;
  VideoId video;
  double time;  // seconds
};

// Half-open lookback interval [end - width, end). width may be infinite.
struct WindowSpec {
  double end = 0.0;
  double width = std::numeric_limits<double>::infinity();
  double begin() const { return end - width; }
};

struct CascadeEvent {
  UserId user;
  double time;
};

// Time-ordered request sequence of a single video.
struct Cascade {
  VideoId video = 0;
  std::vector<CascadeEvent> events;  // sorted non-decreasing by time

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  std::size_t unique_users() const;
  double span() const;  // last event time - first event time (0 if < 2 events)
};

enum class TraceFormat {
  canonical_csv,   // "timestamp,user_key,video_key" per line
  umass_youtube,   // whitespace-separated campus-trace layout, tolerant
};

// Accepts "csv" and "umass"; throws ConfigError otherwise.
TraceFormat parse_trace_format(const std::string& name);

class TraceView;

// An immutable, time-sorted request trace plus the id <-> original-key
// mapping recorded at ingest. Safe for concurrent shared reads.
class Trace {
 public:
  struct KeyedEvent {
    std::string user_key;
    std::string video_key;
    double time;
  };

  Trace() = default;

  // Parses, sorts by time (stable), and assigns dense first-appearance
  // ids. canonical_csv is strict (ParseError with line number);
  // umass_youtube skips unparseable lines and counts them.
  static Trace ingest(std::istream& in, TraceFormat format);

  // Builds a trace from already-keyed events (synthetic generation,
  // sub-trace extraction). Events need not be sorted.
  static Trace from_events(std::vector<KeyedEvent> events);

  std::size_t size() const { return transactions_.size(); }
  bool empty() const { return transactions_.empty(); }
  std::span<const Transaction> transactions() const { return transactions_; }
  std::uint32_t n_users() const { return static_cast<std::uint32_t>(user_keys_.size()); }
  std::uint32_t n_videos() const { return static_cast<std::uint32_t>(video_keys_.size()); }

  double origin() const;    // earliest timestamp; 0 for an empty trace
  double end_time() const;  // latest timestamp; 0 for an empty trace

  const std::string& user_key(UserId u) const { return user_keys_.at(u); }
  const std::string& video_key(VideoId v) const { return video_keys_.at(v); }
  bool find_user(const std::string& key, UserId& out) const;
  bool find_video(const std::string& key, VideoId& out) const;

  // Lines skipped by a tolerant reader (0 for canonical input).
  std::uint64_t skipped_lines() const { return skipped_lines_; }

  TraceView window(const WindowSpec& spec) const;
  TraceView full_view() const;

  // Canonical CSV; ingest(serialize(t)) reproduces t exactly.
  void serialize(std::ostream& out) const;

 private:
  friend class TraceView;

  std::vector<Transaction> transactions_;
  std::vector<std::string> user_keys_;
  std::vector<std::string> video_keys_;
  std::unordered_map<std::string, UserId> user_ids_;
  std::unordered_map<std::string, VideoId> video_ids_;
  std::uint64_t skipped_lines_ = 0;
};

// Contiguous slice of a trace: the transactions with begin <= time < end.
class TraceView {
 public:
  TraceView() = default;
  TraceView(const Trace* trace, std::size_t first, std::size_t last, WindowSpec spec)
      : trace_(trace), first_(first), last_(last), spec_(spec) {}

  std::span<const Transaction> events() const;
  std::size_t size() const { return last_ - first_; }
  bool empty() const { return last_ == first_; }
  const Trace& trace() const { return *trace_; }
  const WindowSpec& spec() const { return spec_; }

  std::vector<UserId> distinct_users() const;    // ascending
  std::vector<VideoId> distinct_videos() const;  // ascending

  // Re-windowing a view intersects the intervals, so
  // view.window(view.spec()) == view.
  TraceView window(const WindowSpec& spec) const;

 private:
  const Trace* trace_ = nullptr;
  std::size_t first_ = 0;
  std::size_t last_ = 0;
  WindowSpec spec_;
};

// Per-video partition of a view, ordered by ascending video id.
std::vector<Cascade> cascades(const TraceView& view);

// Time of the ceil(f*n)-th transaction (1-based) for f > 0; the first
// event's time for f = 0. Throws std::domain_error on an empty cascade
// or f outside [0, 1].
double percentile_time(const Cascade& c, double f);

// First ceil(f*n) events; prefix(c, 1) == c, prefix(c, 0) is empty.
Cascade prefix(const Cascade& c, double f);

}  // namespace vpop
