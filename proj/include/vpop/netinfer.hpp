#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vpop/powerlaw.hpp"
#include "vpop/trace.hpp"

namespace vpop {

// Per-column box constraint: entries live in [0, 1 - kEdgeCap].
inline constexpr double kEdgeEpsilon = 1e-6;

struct SparseEntry {
  UserId user;  // source for columns, target for out-edge lists
  double prob;
};

// Incoming transmission probabilities of one target user, sorted by
// ascending source id. Entries are strictly positive.
struct SparseColumn {
  std::vector<SparseEntry> entries;

  double get(UserId source) const;
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// Sparse directed user-to-user sharing probabilities. Columns hold the
// incoming edges of each target; finalize() builds the out-edge index
// that scoring iterates over.
class TransmissionGraph {
 public:
  TransmissionGraph() = default;
  explicit TransmissionGraph(std::uint32_t n_users);

  std::uint32_t n_users() const { return n_users_; }
  void set_column(UserId target, SparseColumn column);
  const SparseColumn& column(UserId target) const;

  // Rebuilds the out-edge index and support set; call after the last
  // set_column. Graphs loaded or inferred through this module arrive
  // finalized.
  void finalize();
  bool finalized() const { return finalized_; }

  std::span<const SparseEntry> out_edges(UserId source) const;
  std::size_t edge_count() const;

  // Users with at least one incoming or outgoing edge.
  const std::vector<bool>& support() const;
  std::uint32_t support_size() const;

 private:
  void require_finalized() const;

  std::uint32_t n_users_ = 0;
  std::vector<SparseColumn> columns_;
  // out-edge index: CSR over sources
  std::vector<std::size_t> out_offsets_;
  std::vector<SparseEntry> out_entries_;
  std::vector<bool> support_;
  std::uint32_t support_size_ = 0;
  bool finalized_ = false;
};

struct SolverConfig {
  double step = 0.1;               // initial ascent step, halved on backtracking
  std::uint32_t max_iterations = 500;
  double tolerance = 1e-8;         // relative log-likelihood improvement
};

struct InferenceConfig {
  std::uint32_t sparsity = 300;            // max nonzeros per column
  double history_width = 60.0 * 3600.0;    // seconds
  double relearn_period = 10.0 * 3600.0;   // seconds
  std::uint32_t min_unique_users = 3;
  PowerLawParams incubation;
  SolverConfig solver;
};

// Cascades usable for inference: >= 3 events and >= min_unique_users
// distinct users, reduced to each user's first request (the infection
// time). Events stay time-ordered.
std::vector<Cascade> valid_inference_cascades(const TraceView& view,
                                              const InferenceConfig& cfg);

// Independent-cascade log-likelihood of one column. Infected targets
// contribute log(1 - prod(1 - A*w)) over strictly earlier users; targets
// absent from a cascade contribute sum log(1 - A) over its infected
// users. Seeds (no earlier user) contribute nothing. Returns -inf when a
// hazard vanishes or an entry reaches 1 in a survival term.
double column_loglik(UserId target, const SparseColumn& col,
                     std::span<const Cascade> cascades,
                     const PowerLawParams& incubation);

// Preprocessed per-target likelihood, shared by column_loglik and the
// solver so both evaluate the identical function.
struct ColumnProblem {
  UserId target = 0;
  std::vector<UserId> candidates;      // ascending; one slot per optimizable entry
  std::vector<double> survival_mult;   // cascades where target absent, per candidate
  struct InfectionTerm {
    // (candidate index, incubation weight of the elapsed gap)
    std::vector<std::pair<std::uint32_t, double>> parents;
  };
  std::vector<InfectionTerm> infections;

  std::size_t dim() const { return candidates.size(); }
};

ColumnProblem build_column_problem(UserId target, std::span<const Cascade> cascades,
                                   const PowerLawParams& incubation);

double problem_loglik(const ColumnProblem& p, std::span<const double> x);
// Returns the log-likelihood and fills grad (same length as candidates).
double problem_loglik_grad(const ColumnProblem& p, std::span<const double> x,
                           std::span<double> grad);

// Projected gradient ascent over [0, 1 - kEdgeEpsilon]^d, then a hard
// projection onto the sparsity budget with one re-optimization over the
// kept support. Deterministic given config and cascade order.
SparseColumn infer_column(UserId target, std::span<const Cascade> cascades,
                          const InferenceConfig& cfg);

// All columns of a user universe; column tasks run on up to `jobs`
// threads. Result is independent of the thread count.
TransmissionGraph infer_graph(std::uint32_t n_users,
                              std::span<const Cascade> cascades,
                              const InferenceConfig& cfg, unsigned jobs = 1);

struct RelearnInstant {
  double time;
  WindowSpec history;
};

// Relearn instants at the span start and every relearn_period after it,
// each paired with its lookback window.
std::vector<RelearnInstant> inference_schedule(double span_begin, double span_end,
                                               const InferenceConfig& cfg);

// Text serialization: a header with n_users, config hash and relearn
// timestamp, then one "source,target,probability" line per edge. Edges
// reference user keys so files from different runs stay comparable.
void save_graph(std::ostream& out, const TransmissionGraph& graph,
                const std::vector<std::string>& user_keys,
                std::string_view config_hash, double relearn_time);

// Reload against a trace's key universe; edges naming unknown users are
// dropped (counted in dropped_edges when given).
TransmissionGraph load_graph(std::istream& in, const Trace& trace,
                             double* relearn_time = nullptr,
                             std::uint64_t* dropped_edges = nullptr);

// Raw edge list of a graph file, for file-level comparisons.
struct GraphFileEdge {
  std::string source;
  std::string target;
  double prob;
};
std::vector<GraphFileEdge> read_graph_edges(std::istream& in);

}  // namespace vpop
