#include "vpop.h"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "run_config.hpp"
#include "vpop/errors.hpp"
#include "vpop/harness.hpp"
#include "vpop/netinfer.hpp"
#include "vpop/synthgen.hpp"
#include "vpop/trace.hpp"

namespace fs = std::filesystem;

struct vpop_trace {
  vpop::Trace trace;
};

struct vpop_graph {
  vpop::TransmissionGraph graph;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_canonical;
thread_local std::string g_hash;

vpop_status fail(vpop_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
vpop_status guarded(Fn&& fn) {
  try {
    fn();
    return VPOP_OK;
  } catch (const vpop::ConfigError& e) {
    return fail(VPOP_CONFIG_ERROR, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(VPOP_CONFIG_ERROR, e.what());
  } catch (const vpop::DataError& e) {
    return fail(VPOP_DATA_ERROR, e.what());
  } catch (const std::domain_error& e) {
    return fail(VPOP_DATA_ERROR, e.what());
  } catch (const vpop::NumericError& e) {
    return fail(VPOP_NUMERIC_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(VPOP_NUMERIC_ERROR, e.what());
  }
}

std::ifstream open_input(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vpop::ConfigError(std::string("cannot open '") + path + "'");
  return in;
}

std::ofstream open_output(const char* path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vpop::ConfigError(std::string("cannot write '") + path + "'");
  return out;
}

template <typename T>
T* require(T* p, const char* what) {
  if (!p) throw vpop::ConfigError(std::string(what) + " must not be NULL");
  return p;
}

std::string config_or_empty(const char* config_json) {
  return config_json ? std::string(config_json) : std::string();
}

// Power-law samples per the fit pipeline: training-span cascades with at
// least min_fit_views requests, one mean inter-arrival each.
std::vector<double> fit_samples(const vpop::Trace& trace, const vpop::RunConfig& cfg) {
  const double train_end = trace.origin() + cfg.train_hours * 3600.0;
  const vpop::TraceView view =
      trace.window(vpop::WindowSpec{train_end, cfg.train_hours * 3600.0});
  std::vector<double> samples;
  for (const auto& c : vpop::cascades(view)) {
    if (c.size() >= cfg.min_fit_views) {
      samples.push_back(vpop::mean_interarrival(c, cfg.clamp_resolution));
    }
  }
  return samples;
}

}  // namespace

extern "C" {

const char* vpop_last_error(void) { return g_last_error.c_str(); }

vpop_status vpop_trace_open(const char* path, const char* format, vpop_trace** out) {
  return guarded([&] {
    require(out, "out");
    auto in = open_input(require(path, "path"));
    const auto fmt = vpop::parse_trace_format(require(format, "format"));
    auto handle = std::make_unique<vpop_trace>();
    handle->trace = vpop::Trace::ingest(in, fmt);
    *out = handle.release();
  });
}

vpop_status vpop_trace_parse(const char* data, size_t len, const char* format,
                             vpop_trace** out) {
  return guarded([&] {
    require(out, "out");
    require(data, "data");
    const auto fmt = vpop::parse_trace_format(require(format, "format"));
    std::istringstream in(std::string(data, len));
    auto handle = std::make_unique<vpop_trace>();
    handle->trace = vpop::Trace::ingest(in, fmt);
    *out = handle.release();
  });
}

void vpop_trace_free(vpop_trace* trace) { delete trace; }

vpop_status vpop_trace_stats_get(const vpop_trace* trace, vpop_trace_stats* out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    out->transactions = trace->trace.size();
    out->users = trace->trace.n_users();
    out->videos = trace->trace.n_videos();
    out->origin = trace->trace.origin();
    out->end_time = trace->trace.end_time();
    out->skipped_lines = trace->trace.skipped_lines();
  });
}

vpop_status vpop_trace_save(const vpop_trace* trace, const char* path) {
  return guarded([&] {
    require(trace, "trace");
    auto out = open_output(require(path, "path"));
    trace->trace.serialize(out);
  });
}

vpop_status vpop_fit(const vpop_trace* trace, const char* config_json,
                     const char* out_path, vpop_powerlaw* out) {
  return guarded([&] {
    require(trace, "trace");
    const vpop::RunConfig cfg = vpop::parse_run_config(config_or_empty(config_json));
    const auto samples = fit_samples(trace->trace, cfg);
    if (samples.size() < 2) {
      throw vpop::DataError("fit: fewer than 2 training cascades with " +
                            std::to_string(cfg.min_fit_views) + "+ views");
    }
    const vpop::PowerLawParams params = vpop::fit(samples);
    if (out) {
      out->alpha = params.alpha;
      out->t_min = params.t_min;
      out->samples = samples.size();
    }
    if (out_path) {
      auto file = open_output(out_path);
      const std::string hash = vpop::config_hash(vpop::canonical_run_config(cfg));
      vpop::save_params(file, params, samples.size(), hash);
    }
  });
}

vpop_status vpop_infer_to_dir(const vpop_trace* trace, const char* config_json,
                              const char* out_dir, uint32_t* graphs_written) {
  return guarded([&] {
    require(trace, "trace");
    const vpop::RunConfig cfg = vpop::parse_run_config(config_or_empty(config_json));
    const std::string dir = require(out_dir, "out_dir");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw vpop::ConfigError("cannot create output directory '" + dir + "'");

    const vpop::Trace& t = trace->trace;
    vpop::ExperimentConfig exp = vpop::to_experiment_config(cfg, t);
    vpop::InferenceConfig inference = exp.inference;
    {
      const auto samples = fit_samples(t, cfg);
      if (samples.size() >= 2) inference.incubation = vpop::fit(samples);
    }
    const std::string hash = vpop::config_hash(vpop::canonical_run_config(cfg));
    const auto schedule = vpop::inference_schedule(exp.test.begin, exp.test.end, inference);
    std::vector<std::string> keys;
    keys.reserve(t.n_users());
    for (vpop::UserId u = 0; u < t.n_users(); ++u) keys.push_back(t.user_key(u));
    uint32_t written = 0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const vpop::TraceView history = t.window(schedule[i].history);
      const auto training = vpop::valid_inference_cascades(history, inference);
      const vpop::TransmissionGraph g =
          vpop::infer_graph(t.n_users(), training, inference, cfg.jobs);
      char name[32];
      std::snprintf(name, sizeof name, "graph_%03zu.csv", i);
      auto file = open_output((fs::path(dir) / name).string().c_str());
      vpop::save_graph(file, g, keys, hash, schedule[i].time);
      ++written;
    }
    if (graphs_written) *graphs_written = written;
  });
}

vpop_status vpop_graph_open(const char* path, const vpop_trace* trace, vpop_graph** out) {
  return guarded([&] {
    require(out, "out");
    require(trace, "trace");
    auto in = open_input(require(path, "path"));
    auto handle = std::make_unique<vpop_graph>();
    handle->graph = vpop::load_graph(in, trace->trace);
    *out = handle.release();
  });
}

void vpop_graph_free(vpop_graph* graph) { delete graph; }

vpop_status vpop_graph_stats_get(const vpop_graph* graph, uint32_t* n_users,
                                 uint64_t* n_edges) {
  return guarded([&] {
    require(graph, "graph");
    if (n_users) *n_users = graph->graph.n_users();
    if (n_edges) *n_edges = graph->graph.edge_count();
  });
}

vpop_status vpop_generate(const char* world_json, const char* trace_path,
                          const char* truth_path) {
  return guarded([&] {
    const vpop::WorldConfig world =
        vpop::parse_world_config(require(world_json, "world_json"));
    const vpop::Trace trace = vpop::generate(world.world, world.duration);
    {
      auto out = open_output(require(trace_path, "trace_path"));
      trace.serialize(out);
    }
    if (truth_path) {
      std::vector<std::string> keys;
      keys.reserve(world.world.graph.n_users());
      for (vpop::UserId u = 0; u < world.world.graph.n_users(); ++u) {
        keys.push_back(vpop::world_user_key(u));
      }
      auto out = open_output(truth_path);
      const std::string hash =
          vpop::config_hash(vpop::canonical_world_config(world_json));
      vpop::save_graph(out, world.world.graph, keys, hash, 0.0);
    }
  });
}

vpop_status vpop_simulate(const vpop_trace* trace, const char* config_json,
                          const char* out_dir) {
  return guarded([&] {
    require(trace, "trace");
    const vpop::RunConfig cfg = vpop::parse_run_config(config_or_empty(config_json));
    const std::string dir = require(out_dir, "out_dir");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw vpop::ConfigError("cannot create output directory '" + dir + "'");

    const vpop::Trace& t = trace->trace;
    const vpop::ExperimentConfig exp = vpop::to_experiment_config(cfg, t);
    const std::string hash = vpop::config_hash(vpop::canonical_run_config(cfg));

    vpop::ScoreSink sink;
    if (!cfg.dump_scores_dir.empty()) {
      fs::create_directories(cfg.dump_scores_dir, ec);
      if (ec) {
        throw vpop::ConfigError("cannot create score dump directory '" +
                                cfg.dump_scores_dir + "'");
      }
      const std::string score_dir = cfg.dump_scores_dir;
      const vpop::Trace* trace_ptr = &t;
      sink = [score_dir, trace_ptr, hash](vpop::Method m, double at,
                                          const vpop::ScoreVector& sv) {
        char name[64];
        std::snprintf(name, sizeof name, "scores_%s_%.0f.csv", vpop::method_name(m), at);
        std::ofstream out(fs::path(score_dir) / name);
        if (out) {
          out << "# config_hash=" << hash << '\n';
          vpop::dump_scores(out, sv, *trace_ptr);
        }
      };
    }

    const vpop::HitRateReport report = vpop::run_experiment(t, exp, sink);
    {
      auto out = open_output((fs::path(dir) / "periods.csv").string().c_str());
      vpop::write_period_csv(out, report, hash);
    }
    {
      auto out = open_output((fs::path(dir) / "summary.csv").string().c_str());
      vpop::write_summary_csv(out, report, hash);
    }
    {
      auto out = open_output((fs::path(dir) / "hitrate_vs_k.dat").string().c_str());
      vpop::write_plot_data(out, report, hash);
    }
  });
}

vpop_status vpop_config_canonical(const char* config_json, const char** canonical,
                                  const char** hash) {
  return guarded([&] {
    const vpop::RunConfig cfg = vpop::parse_run_config(config_or_empty(config_json));
    g_canonical = vpop::canonical_run_config(cfg);
    g_hash = vpop::config_hash(g_canonical);
    if (canonical) *canonical = g_canonical.c_str();
    if (hash) *hash = g_hash.c_str();
  });
}

}  // extern "C"
