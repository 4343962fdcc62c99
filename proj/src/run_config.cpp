#include "run_config.hpp"

#include <cstdio>
#include <set>
#include <string>

#include <json.hpp>

#include "vpop/errors.hpp"

namespace vpop {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
  if (text.empty()) return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: malformed JSON");
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
  return j[key].get<double>();
}

std::uint64_t get_uint(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned()) {
    throw ConfigError(std::string("config: ") + key + " must be a non-negative integer");
  }
  return j[key].get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(std::string("config: ") + key + " must be a boolean");
  return j[key].get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(std::string("config: ") + key + " must be a string");
  return j[key].get<std::string>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  reject_unknown(j,
                 {"format", "train_hours", "test_hours", "period_hours", "k_values",
                  "methods", "connected_only", "baseline", "viralness", "inference",
                  "combine", "social_window_hours", "clamp_resolution", "min_fit_views",
                  "rng_seed", "jobs", "dump_scores_dir"},
                 "run config");
  RunConfig c;
  c.format = get_string(j, "format", c.format);
  parse_trace_format(c.format);  // validates
  c.train_hours = get_number(j, "train_hours", c.train_hours);
  c.test_hours = get_number(j, "test_hours", c.test_hours);
  c.period_hours = get_number(j, "period_hours", c.period_hours);
  if (!(c.period_hours > 0.0)) throw ConfigError("config: period_hours must be positive");
  if (c.train_hours < 0.0 || c.test_hours < 0.0) {
    throw ConfigError("config: spans must be non-negative");
  }

  if (j.contains("k_values")) {
    if (!j["k_values"].is_array() || j["k_values"].empty()) {
      throw ConfigError("config: k_values must be a non-empty array");
    }
    c.k_values.clear();
    for (const auto& v : j["k_values"]) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
        throw ConfigError("config: k_values entries must be positive integers");
      }
      c.k_values.push_back(v.get<std::uint32_t>());
    }
  }
  if (j.contains("methods")) {
    if (!j["methods"].is_array() || j["methods"].empty()) {
      throw ConfigError("config: methods must be a non-empty array");
    }
    c.methods.clear();
    for (const auto& v : j["methods"]) {
      Method m;
      if (!v.is_string() || !parse_method(v.get<std::string>(), m)) {
        throw ConfigError("config: unknown method '" + v.dump() + "'");
      }
      c.methods.push_back(m);
    }
  }
  c.connected_only = get_bool(j, "connected_only", c.connected_only);

  if (j.contains("baseline")) {
    const json& b = j["baseline"];
    reject_unknown(b, {"gamma", "window_hours", "zipf_exponent"}, "baseline");
    c.baseline.gamma = get_number(b, "gamma", c.baseline.gamma);
    if (!(c.baseline.gamma >= 0.0 && c.baseline.gamma <= 1.0)) {
      throw ConfigError("config: baseline.gamma must be in [0,1]");
    }
    c.baseline.window = get_number(b, "window_hours", c.baseline.window / 3600.0) * 3600.0;
    if (!(c.baseline.window > 0.0)) throw ConfigError("config: baseline.window_hours must be positive");
    c.baseline.zipf_exponent = get_number(b, "zipf_exponent", c.baseline.zipf_exponent);
    if (c.baseline.zipf_exponent < 0.0) {
      throw ConfigError("config: baseline.zipf_exponent must be >= 0");
    }
  }
  if (j.contains("viralness")) {
    const json& v = j["viralness"];
    reject_unknown(v, {"f1", "f2", "f3", "min_views", "min_span_hours"}, "viralness");
    c.viralness.f1 = get_number(v, "f1", c.viralness.f1);
    c.viralness.f2 = get_number(v, "f2", c.viralness.f2);
    c.viralness.f3 = get_number(v, "f3", c.viralness.f3);
    if (!(0.0 <= c.viralness.f1 && c.viralness.f1 < c.viralness.f2 &&
          c.viralness.f2 <= c.viralness.f3 && c.viralness.f3 <= 1.0)) {
      throw ConfigError("config: viralness fractions need 0 <= f1 < f2 <= f3 <= 1");
    }
    c.viralness.min_views = static_cast<std::uint32_t>(get_uint(v, "min_views", c.viralness.min_views));
    c.viralness.min_span = get_number(v, "min_span_hours", c.viralness.min_span / 3600.0) * 3600.0;
  }
  if (j.contains("inference")) {
    const json& i = j["inference"];
    reject_unknown(i,
                   {"sparsity", "history_hours", "relearn_hours", "min_unique_users",
                    "step", "max_iterations", "tolerance"},
                   "inference");
    c.inference.sparsity = static_cast<std::uint32_t>(get_uint(i, "sparsity", c.inference.sparsity));
    if (c.inference.sparsity < 1) throw ConfigError("config: inference.sparsity must be >= 1");
    c.inference.history_width =
        get_number(i, "history_hours", c.inference.history_width / 3600.0) * 3600.0;
    c.inference.relearn_period =
        get_number(i, "relearn_hours", c.inference.relearn_period / 3600.0) * 3600.0;
    if (!(c.inference.history_width > 0.0) || !(c.inference.relearn_period > 0.0)) {
      throw ConfigError("config: inference windows must be positive");
    }
    c.inference.min_unique_users =
        static_cast<std::uint32_t>(get_uint(i, "min_unique_users", c.inference.min_unique_users));
    if (c.inference.min_unique_users < 1) {
      throw ConfigError("config: inference.min_unique_users must be >= 1");
    }
    c.inference.solver.step = get_number(i, "step", c.inference.solver.step);
    c.inference.solver.max_iterations =
        static_cast<std::uint32_t>(get_uint(i, "max_iterations", c.inference.solver.max_iterations));
    c.inference.solver.tolerance = get_number(i, "tolerance", c.inference.solver.tolerance);
  }
  if (j.contains("combine")) {
    const json& m = j["combine"];
    reject_unknown(m, {"beta", "sum_mode"}, "combine");
    c.combine.beta = get_number(m, "beta", c.combine.beta);
    if (!(c.combine.beta >= 0.0 && c.combine.beta <= 1.0)) {
      throw ConfigError("config: combine.beta must be in [0,1]");
    }
    c.combine.sum_mode = get_bool(m, "sum_mode", c.combine.sum_mode);
  }
  c.social_window_hours = get_number(j, "social_window_hours", c.social_window_hours);
  if (!(c.social_window_hours > 0.0)) {
    throw ConfigError("config: social_window_hours must be positive");
  }
  c.clamp_resolution = get_number(j, "clamp_resolution", c.clamp_resolution);
  if (!(c.clamp_resolution > 0.0)) throw ConfigError("config: clamp_resolution must be positive");
  c.min_fit_views = static_cast<std::uint32_t>(get_uint(j, "min_fit_views", c.min_fit_views));
  if (c.min_fit_views < 2) throw ConfigError("config: min_fit_views must be >= 2");
  c.rng_seed = get_uint(j, "rng_seed", c.rng_seed);
  c.jobs = static_cast<unsigned>(get_uint(j, "jobs", c.jobs));
  if (c.jobs < 1) throw ConfigError("config: jobs must be >= 1");
  c.dump_scores_dir = get_string(j, "dump_scores_dir", c.dump_scores_dir);
  return c;
}

std::string canonical_run_config(const RunConfig& c) {
  json j;
  j["format"] = c.format;
  j["train_hours"] = c.train_hours;
  j["test_hours"] = c.test_hours;
  j["period_hours"] = c.period_hours;
  j["k_values"] = c.k_values;
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  j["connected_only"] = c.connected_only;
  j["baseline"] = {{"gamma", c.baseline.gamma},
                   {"window_hours", c.baseline.window / 3600.0},
                   {"zipf_exponent", c.baseline.zipf_exponent}};
  j["viralness"] = {{"f1", c.viralness.f1},
                    {"f2", c.viralness.f2},
                    {"f3", c.viralness.f3},
                    {"min_views", c.viralness.min_views},
                    {"min_span_hours", c.viralness.min_span / 3600.0}};
  j["inference"] = {{"sparsity", c.inference.sparsity},
                    {"history_hours", c.inference.history_width / 3600.0},
                    {"relearn_hours", c.inference.relearn_period / 3600.0},
                    {"min_unique_users", c.inference.min_unique_users},
                    {"step", c.inference.solver.step},
                    {"max_iterations", c.inference.solver.max_iterations},
                    {"tolerance", c.inference.solver.tolerance}};
  j["combine"] = {{"beta", c.combine.beta}, {"sum_mode", c.combine.sum_mode}};
  j["social_window_hours"] = c.social_window_hours;
  j["clamp_resolution"] = c.clamp_resolution;
  j["min_fit_views"] = c.min_fit_views;
  j["rng_seed"] = c.rng_seed;
  j["jobs"] = c.jobs;
  j["dump_scores_dir"] = c.dump_scores_dir;
  return j.dump();
}

std::string config_hash(const std::string& canonical_text) {
  // The worker cap and dump destination do not affect results; normalize
  // them away so reruns hash identically regardless of parallelism.
  json j = json::parse(canonical_text, nullptr, false);
  std::string basis = canonical_text;
  if (!j.is_discarded() && j.is_object()) {
    j.erase("jobs");
    j.erase("dump_scores_dir");
    basis = j.dump();
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : basis) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig to_experiment_config(const RunConfig& c, const Trace& trace) {
  ExperimentConfig e;
  const double origin = trace.origin();
  e.train = {origin, origin + c.train_hours * 3600.0};
  e.test = {e.train.end, e.train.end + c.test_hours * 3600.0};
  e.period = c.period_hours * 3600.0;
  e.k_values = c.k_values;
  e.methods = c.methods;
  e.connected_only = c.connected_only;
  e.baseline = c.baseline;
  e.viralness = c.viralness;
  e.inference = c.inference;
  e.combine = c.combine;
  e.social_window = c.social_window_hours * 3600.0;
  e.clamp_resolution = c.clamp_resolution;
  e.min_fit_views = c.min_fit_views;
  e.jobs = c.jobs;
  return e;
}

WorldConfig parse_world_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  reject_unknown(j,
                 {"n_users", "n_videos", "seed_rate", "noise_rate", "rng_seed",
                  "duration_hours", "incubation", "graph"},
                 "world config");
  WorldConfig out;
  const auto n_users = static_cast<std::uint32_t>(get_uint(j, "n_users", 0));
  out.world.n_videos = static_cast<std::uint32_t>(get_uint(j, "n_videos", 0));
  if (n_users == 0 || out.world.n_videos == 0) {
    throw ConfigError("world config: n_users and n_videos are required");
  }
  out.world.seed_rate = get_number(j, "seed_rate", 0.0);
  out.world.noise_rate = get_number(j, "noise_rate", 0.0);
  if (!(out.world.noise_rate >= 0.0 && out.world.noise_rate < 1.0)) {
    throw ConfigError("world config: noise_rate must be in [0, 1)");
  }
  out.world.rng_seed = get_uint(j, "rng_seed", 0);
  out.duration = get_number(j, "duration_hours", 0.0) * 3600.0;
  if (!(out.duration > 0.0)) throw ConfigError("world config: duration_hours must be positive");

  if (j.contains("incubation")) {
    const json& inc = j["incubation"];
    reject_unknown(inc, {"alpha", "t_min"}, "incubation");
    out.world.incubation.alpha = get_number(inc, "alpha", out.world.incubation.alpha);
    out.world.incubation.t_min = get_number(inc, "t_min", out.world.incubation.t_min);
    if (!(out.world.incubation.alpha > 1.0) || !(out.world.incubation.t_min > 0.0)) {
      throw ConfigError("world config: incubation needs alpha > 1 and t_min > 0");
    }
  }

  if (!j.contains("graph")) throw ConfigError("world config: graph is required");
  const json& g = j["graph"];
  const std::string kind = get_string(g, "kind", "");
  if (kind == "star") {
    reject_unknown(g, {"kind", "hub", "p_min", "p_max", "seed"}, "graph");
    out.world.graph = star_graph(n_users, static_cast<UserId>(get_uint(g, "hub", 0)),
                                 get_number(g, "p_min", 0.3), get_number(g, "p_max", 0.8),
                                 get_uint(g, "seed", 0));
  } else if (kind == "random") {
    reject_unknown(g, {"kind", "edges", "p_min", "p_max", "seed"}, "graph");
    out.world.graph = random_graph(n_users, static_cast<std::uint32_t>(get_uint(g, "edges", 0)),
                                   get_number(g, "p_min", 0.3), get_number(g, "p_max", 0.8),
                                   get_uint(g, "seed", 0));
  } else if (kind == "star_random") {
    reject_unknown(g, {"kind", "hub", "extra_edges", "p_min", "p_max", "seed"}, "graph");
    out.world.graph = star_random_graph(
        n_users, static_cast<UserId>(get_uint(g, "hub", 0)),
        static_cast<std::uint32_t>(get_uint(g, "extra_edges", 0)),
        get_number(g, "p_min", 0.3), get_number(g, "p_max", 0.8), get_uint(g, "seed", 0));
  } else if (kind == "edges") {
    reject_unknown(g, {"kind", "list"}, "graph");
    if (!g.contains("list") || !g["list"].is_array()) {
      throw ConfigError("world config: graph.list must be an array");
    }
    std::vector<std::tuple<UserId, UserId, double>> edges;
    for (const auto& e : g["list"]) {
      if (!e.is_array() || e.size() != 3) {
        throw ConfigError("world config: graph.list entries are [source, target, prob]");
      }
      edges.emplace_back(e[0].get<UserId>(), e[1].get<UserId>(), e[2].get<double>());
    }
    out.world.graph = graph_from_edges(n_users, edges);
  } else {
    throw ConfigError("world config: graph.kind must be star, random, star_random or edges");
  }
  return out;
}

std::string canonical_world_config(const std::string& json_text) {
  parse_world_config(json_text);  // validate
  return parse_json(json_text).dump();
}

}  // namespace vpop
