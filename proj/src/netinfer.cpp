#include "vpop/netinfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "parallel.hpp"
#include "vpop/errors.hpp"

namespace vpop {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kEdgeCap = 1.0 - kEdgeEpsilon;
constexpr double kInitialEdge = 0.1;

// First event per user, time order preserved. Cascades from
// valid_inference_cascades are already in this form.
std::vector<CascadeEvent> first_events(const Cascade& c) {
  std::vector<CascadeEvent> out;
  out.reserve(c.events.size());
  std::unordered_set<UserId> seen;
  seen.reserve(c.events.size());
  for (const auto& e : c.events) {
    if (seen.insert(e.user).second) out.push_back(e);
  }
  return out;
}

void format_double(char* buf, std::size_t n, double v) {
  std::snprintf(buf, n, "%.17g", v);
}

}  // namespace

double SparseColumn::get(UserId source) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), source,
                             [](const SparseEntry& e, UserId u) { return e.user < u; });
  if (it == entries.end() || it->user != source) return 0.0;
  return it->prob;
}

TransmissionGraph::TransmissionGraph(std::uint32_t n_users)
    : n_users_(n_users), columns_(n_users) {}

void TransmissionGraph::set_column(UserId target, SparseColumn column) {
  if (target >= n_users_) throw std::out_of_range("set_column: target out of range");
  std::sort(column.entries.begin(), column.entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.user < b.user; });
  std::vector<SparseEntry> kept;
  kept.reserve(column.entries.size());
  for (const auto& e : column.entries) {
    if (e.user >= n_users_) throw std::out_of_range("set_column: source out of range");
    if (e.user == target) throw std::invalid_argument("set_column: self edge");
    if (!(e.prob >= 0.0 && e.prob <= 1.0) || !std::isfinite(e.prob)) {
      throw std::invalid_argument("set_column: probability outside [0,1]");
    }
    if (e.prob > 0.0) kept.push_back(e);
  }
  column.entries = std::move(kept);
  columns_[target] = std::move(column);
  finalized_ = false;
}

const SparseColumn& TransmissionGraph::column(UserId target) const {
  return columns_.at(target);
}

void TransmissionGraph::finalize() {
  std::vector<std::size_t> degree(n_users_, 0);
  support_.assign(n_users_, false);
  for (UserId target = 0; target < n_users_; ++target) {
    for (const auto& e : columns_[target].entries) {
      ++degree[e.user];
      support_[e.user] = true;
      support_[target] = true;
    }
  }
  out_offsets_.assign(n_users_ + 1, 0);
  for (UserId u = 0; u < n_users_; ++u) out_offsets_[u + 1] = out_offsets_[u] + degree[u];
  out_entries_.assign(out_offsets_[n_users_], SparseEntry{});
  std::vector<std::size_t> cursor(out_offsets_.begin(), out_offsets_.end() - 1);
  for (UserId target = 0; target < n_users_; ++target) {
    for (const auto& e : columns_[target].entries) {
      out_entries_[cursor[e.user]++] = SparseEntry{target, e.prob};
    }
  }
  support_size_ = 0;
  for (bool b : support_) support_size_ += b ? 1 : 0;
  finalized_ = true;
}

void TransmissionGraph::require_finalized() const {
  if (!finalized_) throw std::logic_error("TransmissionGraph: finalize() not called");
}

std::span<const SparseEntry> TransmissionGraph::out_edges(UserId source) const {
  require_finalized();
  if (source >= n_users_) throw std::out_of_range("out_edges: source out of range");
  return std::span<const SparseEntry>(out_entries_)
      .subspan(out_offsets_[source], out_offsets_[source + 1] - out_offsets_[source]);
}

std::size_t TransmissionGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& c : columns_) n += c.entries.size();
  return n;
}

const std::vector<bool>& TransmissionGraph::support() const {
  require_finalized();
  return support_;
}

std::uint32_t TransmissionGraph::support_size() const {
  require_finalized();
  return support_size_;
}

std::vector<Cascade> valid_inference_cascades(const TraceView& view,
                                              const InferenceConfig& cfg) {
  std::vector<Cascade> out;
  for (auto& c : cascades(view)) {
    if (c.events.size() < 3) continue;
    auto infections = first_events(c);
    if (infections.size() < cfg.min_unique_users) continue;
    out.push_back(Cascade{c.video, std::move(infections)});
  }
  return out;
}

namespace {

// Shared per-inference-round view of the training cascades: deduped
// infection sequences plus per-user appearance counts, so column tasks
// touch only the cascades their target appears in.
struct CascadeIndex {
  std::vector<std::vector<CascadeEvent>> infections;        // per cascade
  std::unordered_map<UserId, std::vector<std::uint32_t>> containing;
  std::unordered_map<UserId, std::uint32_t> appearances;

  explicit CascadeIndex(std::span<const Cascade> cascades) {
    infections.reserve(cascades.size());
    for (const auto& c : cascades) {
      const auto idx = static_cast<std::uint32_t>(infections.size());
      infections.push_back(first_events(c));
      for (const auto& e : infections.back()) {
        containing[e.user].push_back(idx);
        ++appearances[e.user];
      }
    }
  }
};

ColumnProblem build_from_index(UserId target, const CascadeIndex& index,
                               const PowerLawParams& incubation) {
  // Candidates for the column of `target`: users that precede one of its
  // infections, plus infected users of cascades it does not appear in.
  ColumnProblem p;
  p.target = target;

  struct RawTerm {
    std::vector<std::pair<UserId, double>> parents;
  };
  std::vector<RawTerm> raw_terms;
  std::unordered_map<UserId, std::uint32_t> co_appear;
  std::unordered_set<UserId> parents;

  auto it = index.containing.find(target);
  if (it != index.containing.end()) {
    for (std::uint32_t ci : it->second) {
      const auto& events = index.infections[ci];
      double target_time = 0.0;
      for (const auto& e : events) {
        if (e.user == target) {
          target_time = e.time;
          break;
        }
      }
      RawTerm term;
      for (const auto& e : events) {
        if (e.user == target) continue;
        ++co_appear[e.user];
        if (e.time < target_time) {
          term.parents.emplace_back(e.user,
                                    incubation_weight(incubation, target_time - e.time));
          parents.insert(e.user);
        }
      }
      // a seed has no explaining parent; it contributes no term
      if (!term.parents.empty()) raw_terms.push_back(std::move(term));
    }
  }

  std::unordered_map<UserId, double> survival;
  for (const auto& [user, count] : index.appearances) {
    if (user == target) continue;
    const auto co = co_appear.find(user);
    const std::uint32_t absent = count - (co == co_appear.end() ? 0 : co->second);
    if (absent > 0 || parents.count(user)) {
      survival[user] = static_cast<double>(absent);
    }
  }

  p.candidates.reserve(survival.size());
  for (const auto& [user, mult] : survival) p.candidates.push_back(user);
  std::sort(p.candidates.begin(), p.candidates.end());
  p.survival_mult.resize(p.candidates.size());
  std::unordered_map<UserId, std::uint32_t> slot;
  slot.reserve(p.candidates.size());
  for (std::uint32_t i = 0; i < p.candidates.size(); ++i) {
    slot[p.candidates[i]] = i;
    p.survival_mult[i] = survival[p.candidates[i]];
  }
  p.infections.reserve(raw_terms.size());
  for (auto& t : raw_terms) {
    ColumnProblem::InfectionTerm term;
    term.parents.reserve(t.parents.size());
    for (auto& [user, w] : t.parents) term.parents.emplace_back(slot[user], w);
    p.infections.push_back(std::move(term));
  }
  return p;
}

}  // namespace

ColumnProblem build_column_problem(UserId target, std::span<const Cascade> cascades,
                                   const PowerLawParams& incubation) {
  return build_from_index(target, CascadeIndex(cascades), incubation);
}

double problem_loglik(const ColumnProblem& p, std::span<const double> x) {
  double loglik = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    if (p.survival_mult[i] == 0.0) continue;
    if (x[i] >= 1.0) return kNegInf;
    loglik += p.survival_mult[i] * std::log1p(-x[i]);
  }
  for (const auto& term : p.infections) {
    double survive = 1.0;
    for (const auto& [idx, w] : term.parents) survive *= 1.0 - x[idx] * w;
    const double hazard = 1.0 - survive;
    if (!(hazard > 0.0)) return kNegInf;
    loglik += std::log(hazard);
  }
  return loglik;
}

double problem_loglik_grad(const ColumnProblem& p, std::span<const double> x,
                           std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  double loglik = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    if (p.survival_mult[i] == 0.0) continue;
    if (x[i] >= 1.0) return kNegInf;
    loglik += p.survival_mult[i] * std::log1p(-x[i]);
    grad[i] -= p.survival_mult[i] / (1.0 - x[i]);
  }
  for (const auto& term : p.infections) {
    double survive = 1.0;
    for (const auto& [idx, w] : term.parents) survive *= 1.0 - x[idx] * w;
    const double hazard = 1.0 - survive;
    if (!(hazard > 0.0)) return kNegInf;
    loglik += std::log(hazard);
    for (const auto& [idx, w] : term.parents) {
      const double factor = 1.0 - x[idx] * w;
      grad[idx] += w * (survive / factor) / hazard;
    }
  }
  return loglik;
}

double column_loglik(UserId target, const SparseColumn& col,
                     std::span<const Cascade> cascades,
                     const PowerLawParams& incubation) {
  ColumnProblem p = build_column_problem(target, cascades, incubation);
  std::vector<double> x(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) x[i] = col.get(p.candidates[i]);
  return problem_loglik(p, x);
}

namespace {

// Projected gradient ascent over [0, kEdgeCap]^d with backtracking step
// halving; accepts only improving steps.
void ascend(const ColumnProblem& p, std::vector<double>& x, const SolverConfig& cfg) {
  const std::size_t d = x.size();
  std::vector<double> grad(d), trial(d);
  double loglik = problem_loglik(p, x);
  for (std::uint32_t iter = 0; iter < cfg.max_iterations; ++iter) {
    const double base = problem_loglik_grad(p, x, grad);
    double step = cfg.step;
    double improved = kNegInf;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i < d; ++i) {
        trial[i] = std::clamp(x[i] + step * grad[i], 0.0, kEdgeCap);
      }
      improved = problem_loglik(p, trial);
      if (improved > base) break;
      step *= 0.5;
    }
    if (!(improved > base)) break;  // projected stationary point
    const double gain = improved - loglik;
    x.swap(trial);
    loglik = improved;
    if (gain < cfg.tolerance * std::max(1.0, std::abs(loglik))) break;
  }
}

// Subproblem restricted to the kept candidate slots. Infection terms
// that lose every parent are dropped: no kept candidate can explain them.
ColumnProblem restrict_problem(const ColumnProblem& p, const std::vector<std::uint32_t>& keep) {
  ColumnProblem sub;
  sub.target = p.target;
  std::vector<std::uint32_t> remap(p.dim(), UINT32_MAX);
  sub.candidates.reserve(keep.size());
  sub.survival_mult.reserve(keep.size());
  for (std::uint32_t new_idx = 0; new_idx < keep.size(); ++new_idx) {
    remap[keep[new_idx]] = new_idx;
    sub.candidates.push_back(p.candidates[keep[new_idx]]);
    sub.survival_mult.push_back(p.survival_mult[keep[new_idx]]);
  }
  for (const auto& term : p.infections) {
    ColumnProblem::InfectionTerm t;
    for (const auto& [idx, w] : term.parents) {
      if (remap[idx] != UINT32_MAX) t.parents.emplace_back(remap[idx], w);
    }
    if (!t.parents.empty()) sub.infections.push_back(std::move(t));
  }
  return sub;
}

}  // namespace

namespace {

SparseColumn solve_column(ColumnProblem p, const InferenceConfig& cfg) {
  SparseColumn out;
  if (p.dim() == 0) return out;  // isolated node

  std::vector<double> x(p.dim(), std::min(kInitialEdge, kEdgeCap));
  ascend(p, x, cfg.solver);

  std::vector<std::uint32_t> positive;
  for (std::uint32_t i = 0; i < p.dim(); ++i) {
    if (x[i] > 0.0) positive.push_back(i);
  }
  if (positive.size() > cfg.sparsity) {
    std::sort(positive.begin(), positive.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (x[a] != x[b]) return x[a] > x[b];
      return p.candidates[a] < p.candidates[b];
    });
    positive.resize(cfg.sparsity);
    std::sort(positive.begin(), positive.end());
    ColumnProblem sub = restrict_problem(p, positive);
    std::vector<double> xs(positive.size());
    for (std::size_t i = 0; i < positive.size(); ++i) xs[i] = x[positive[i]];
    ascend(sub, xs, cfg.solver);
    out.entries.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] > 0.0) out.entries.push_back({sub.candidates[i], xs[i]});
    }
    return out;
  }
  out.entries.reserve(positive.size());
  for (std::uint32_t i : positive) out.entries.push_back({p.candidates[i], x[i]});
  return out;
}

}  // namespace

SparseColumn infer_column(UserId target, std::span<const Cascade> cascades,
                          const InferenceConfig& cfg) {
  return solve_column(build_column_problem(target, cascades, cfg.incubation), cfg);
}

TransmissionGraph infer_graph(std::uint32_t n_users, std::span<const Cascade> cascades,
                              const InferenceConfig& cfg, unsigned jobs) {
  const CascadeIndex index(cascades);
  std::vector<SparseColumn> columns(n_users);
  detail::parallel_for(n_users, jobs, [&](std::size_t u) {
    columns[u] =
        solve_column(build_from_index(static_cast<UserId>(u), index, cfg.incubation), cfg);
  });
  TransmissionGraph g(n_users);
  for (UserId u = 0; u < n_users; ++u) g.set_column(u, std::move(columns[u]));
  g.finalize();
  return g;
}

std::vector<RelearnInstant> inference_schedule(double span_begin, double span_end,
                                               const InferenceConfig& cfg) {
  if (!(span_end > span_begin)) throw DataError("inference_schedule: empty span");
  if (!(cfg.relearn_period > 0.0)) throw ConfigError("inference_schedule: bad period");
  std::vector<RelearnInstant> out;
  for (std::size_t i = 0;; ++i) {
    const double t = span_begin + static_cast<double>(i) * cfg.relearn_period;
    if (t >= span_end) break;
    out.push_back({t, WindowSpec{t, cfg.history_width}});
  }
  return out;
}

void save_graph(std::ostream& out, const TransmissionGraph& graph,
                const std::vector<std::string>& user_keys,
                std::string_view config_hash, double relearn_time) {
  if (user_keys.size() < graph.n_users()) {
    throw std::invalid_argument("save_graph: key table smaller than user universe");
  }
  char buf[40];
  out << "# vpop graph v1\n";
  format_double(buf, sizeof buf, relearn_time);
  out << "# n_users=" << graph.n_users() << " config_hash=" << config_hash
      << " relearn_time=" << buf << '\n';
  for (UserId target = 0; target < graph.n_users(); ++target) {
    for (const auto& e : graph.column(target).entries) {
      format_double(buf, sizeof buf, e.prob);
      out << user_keys[e.user] << ',' << user_keys[target] << ',' << buf << '\n';
    }
  }
}

namespace {

bool parse_header_field(const std::string& line, const std::string& key, std::string& value) {
  auto pos = line.find(key + "=");
  if (pos == std::string::npos) return false;
  pos += key.size() + 1;
  auto end = line.find(' ', pos);
  value = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
  return true;
}

}  // namespace

std::vector<GraphFileEdge> read_graph_edges(std::istream& in) {
  std::vector<GraphFileEdge> edges;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ParseError("expected source,target,probability", line_no);
    }
    GraphFileEdge e;
    e.source = line.substr(0, c1);
    e.target = line.substr(c1 + 1, c2 - c1 - 1);
    try {
      e.prob = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw ParseError("bad probability", line_no);
    }
    if (!(e.prob >= 0.0 && e.prob <= 1.0)) throw ParseError("probability outside [0,1]", line_no);
    edges.push_back(std::move(e));
  }
  return edges;
}

TransmissionGraph load_graph(std::istream& in, const Trace& trace,
                             double* relearn_time, std::uint64_t* dropped_edges) {
  std::string line;
  // scan header comments for the relearn timestamp, then edge lines
  std::uint64_t line_no = 0;
  std::uint64_t dropped = 0;
  std::vector<std::vector<SparseEntry>> incoming(trace.n_users());
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string value;
      if (relearn_time && parse_header_field(line, "relearn_time", value)) {
        *relearn_time = std::stod(value);
      }
      continue;
    }
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ParseError("expected source,target,probability", line_no);
    }
    const std::string source_key = line.substr(0, c1);
    const std::string target_key = line.substr(c1 + 1, c2 - c1 - 1);
    double prob = 0.0;
    try {
      prob = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw ParseError("bad probability", line_no);
    }
    if (!(prob >= 0.0 && prob <= 1.0)) throw ParseError("probability outside [0,1]", line_no);
    UserId source = 0;
    UserId target = 0;
    if (!trace.find_user(source_key, source) || !trace.find_user(target_key, target)) {
      ++dropped;
      continue;
    }
    if (source == target) throw ParseError("self edge", line_no);
    incoming[target].push_back({source, prob});
  }
  TransmissionGraph g(trace.n_users());
  for (UserId target = 0; target < trace.n_users(); ++target) {
    if (incoming[target].empty()) continue;
    SparseColumn col;
    col.entries = std::move(incoming[target]);
    g.set_column(target, std::move(col));
  }
  g.finalize();
  if (dropped_edges) *dropped_edges = dropped;
  return g;
}

}  // namespace vpop
