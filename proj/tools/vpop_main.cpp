// vpop command line: fit / infer / simulate / generate / report.
// Uses only the shared library's C interface; exit codes mirror
// vpop_status (0 ok, 2 config, 3 data, 4 numeric).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vpop.h"

namespace {

using nlohmann::json;

int report_failure(vpop_status status, const char* what) {
  std::cerr << "vpop: " << what << ": " << vpop_last_error() << '\n';
  return static_cast<int>(status);
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "vpop: cannot open config file '" << path << "'\n";
    std::exit(VPOP_CONFIG_ERROR);
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    std::cerr << "vpop: malformed config file '" << path << "'\n";
    std::exit(VPOP_CONFIG_ERROR);
  }
  return j;
}

// Common run-config flags shared by fit / infer / simulate. Flags
// override values from --config.
struct RunFlags {
  std::string config_path;
  std::string format;
  std::optional<double> train_hours, test_hours, period_hours;
  std::vector<std::uint64_t> k_values;
  std::vector<std::string> methods;
  std::optional<bool> connected_only;
  std::optional<double> gamma, window_hours, zipf_exponent;
  std::optional<std::uint64_t> sparsity, min_unique_users, max_iterations, min_fit_views;
  std::optional<double> history_hours, relearn_hours, step, tolerance;
  std::optional<double> beta;
  std::optional<bool> sum_mode;
  std::optional<double> social_window_hours, clamp_resolution;
  std::optional<std::uint64_t> rng_seed, jobs;
  std::string dump_scores_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "JSON run configuration file");
    cmd->add_option("--format", format, "trace format: csv or umass");
    cmd->add_option("--train-hours", train_hours, "training span from trace origin");
    cmd->add_option("--test-hours", test_hours, "test span after training");
    cmd->add_option("--period-hours", period_hours, "cache refresh period");
    cmd->add_option("--k", k_values, "cache sizes to sweep");
    cmd->add_option("--methods", methods,
                    "predictors: baseline viralness interarrival social combined");
    cmd->add_flag("--connected-only", [this](std::int64_t) { connected_only = true; },
                  "restrict to cascades with enough unique users");
    cmd->add_option("--gamma", gamma, "baseline recency-frequency tradeoff");
    cmd->add_option("--window-hours", window_hours, "baseline lookback window");
    cmd->add_option("--zipf-exponent", zipf_exponent, "zipf prior exponent");
    cmd->add_option("--sparsity", sparsity, "max edges per inferred column");
    cmd->add_option("--history-hours", history_hours, "inference lookback window");
    cmd->add_option("--relearn-hours", relearn_hours, "graph relearn period");
    cmd->add_option("--min-unique-users", min_unique_users,
                    "unique-user floor for inference cascades");
    cmd->add_option("--step", step, "solver step size");
    cmd->add_option("--max-iterations", max_iterations, "solver iteration cap");
    cmd->add_option("--tolerance", tolerance, "solver relative improvement cutoff");
    cmd->add_option("--beta", beta, "social share of the combined score");
    cmd->add_flag("--sum-mode", [this](std::int64_t) { sum_mode = true; },
                  "combined score as plain sum instead of beta mix");
    cmd->add_option("--social-window-hours", social_window_hours,
                    "diffusion prediction lookback");
    cmd->add_option("--resolution", clamp_resolution, "gap clamp resolution, seconds");
    cmd->add_option("--min-fit-views", min_fit_views,
                    "cascade length floor for the power-law fit");
    cmd->add_option("--seed", rng_seed, "rng seed recorded in the config");
    cmd->add_option("--jobs", jobs, "worker thread cap");
    cmd->add_option("--dump-scores", dump_scores_dir,
                    "directory for per-period score dumps");
  }

  std::string render() const {
    json j = load_config_file(config_path);
    if (!format.empty()) j["format"] = format;
    if (train_hours) j["train_hours"] = *train_hours;
    if (test_hours) j["test_hours"] = *test_hours;
    if (period_hours) j["period_hours"] = *period_hours;
    if (!k_values.empty()) j["k_values"] = k_values;
    if (!methods.empty()) j["methods"] = methods;
    if (connected_only) j["connected_only"] = *connected_only;
    if (gamma) j["baseline"]["gamma"] = *gamma;
    if (window_hours) j["baseline"]["window_hours"] = *window_hours;
    if (zipf_exponent) j["baseline"]["zipf_exponent"] = *zipf_exponent;
    if (sparsity) j["inference"]["sparsity"] = *sparsity;
    if (history_hours) j["inference"]["history_hours"] = *history_hours;
    if (relearn_hours) j["inference"]["relearn_hours"] = *relearn_hours;
    if (min_unique_users) j["inference"]["min_unique_users"] = *min_unique_users;
    if (step) j["inference"]["step"] = *step;
    if (max_iterations) j["inference"]["max_iterations"] = *max_iterations;
    if (tolerance) j["inference"]["tolerance"] = *tolerance;
    if (beta) j["combine"]["beta"] = *beta;
    if (sum_mode) j["combine"]["sum_mode"] = *sum_mode;
    if (social_window_hours) j["social_window_hours"] = *social_window_hours;
    if (clamp_resolution) j["clamp_resolution"] = *clamp_resolution;
    if (min_fit_views) j["min_fit_views"] = *min_fit_views;
    if (rng_seed) j["rng_seed"] = *rng_seed;
    if (jobs) j["jobs"] = *jobs;
    if (!dump_scores_dir.empty()) j["dump_scores_dir"] = dump_scores_dir;
    return j.dump();
  }

  std::string format_or_default() const {
    if (!format.empty()) return format;
    json j = load_config_file(config_path);
    return j.value("format", "csv");
  }
};

struct TraceHandle {
  vpop_trace* ptr = nullptr;
  ~TraceHandle() { vpop_trace_free(ptr); }
};

int open_trace(const std::string& path, const RunFlags& flags, TraceHandle& handle) {
  const vpop_status st =
      vpop_trace_open(path.c_str(), flags.format_or_default().c_str(), &handle.ptr);
  if (st != VPOP_OK) return report_failure(st, "loading trace");
  vpop_trace_stats stats{};
  vpop_trace_stats_get(handle.ptr, &stats);
  std::cerr << "trace: " << stats.transactions << " requests, " << stats.users
            << " users, " << stats.videos << " videos";
  if (stats.skipped_lines > 0) {
    std::cerr << " (skipped " << stats.skipped_lines << " unparseable lines)";
  }
  std::cerr << '\n';
  return 0;
}

// ---- report subcommand: summarize a periods.csv ---------------------------

struct SeriesKey {
  std::string method;
  std::uint64_t k;
  bool operator<(const SeriesKey& o) const {
    if (method != o.method) return method < o.method;
    return k < o.k;
  }
};

int run_report(const std::string& periods_path, const std::string& plot_path) {
  std::ifstream in(periods_path);
  if (!in) {
    std::cerr << "vpop: cannot open '" << periods_path << "'\n";
    return VPOP_CONFIG_ERROR;
  }
  std::map<SeriesKey, std::vector<double>> series;
  std::string line;
  bool header_seen = false;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {  // method,k,period_start,hit_rate
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string method, k_str, start_str, rate_str;
    if (!std::getline(row, method, ',') || !std::getline(row, k_str, ',') ||
        !std::getline(row, start_str, ',') || !std::getline(row, rate_str)) {
      std::cerr << "vpop: bad row at line " << line_no << '\n';
      return VPOP_DATA_ERROR;
    }
    try {
      series[{method, std::stoull(k_str)}].push_back(std::stod(rate_str));
    } catch (const std::exception&) {
      std::cerr << "vpop: bad row at line " << line_no << '\n';
      return VPOP_DATA_ERROR;
    }
  }

  std::map<std::string, std::vector<double>> per_method;
  std::printf("%-14s %8s %14s %8s\n", "method", "k", "avg_hit_rate", "periods");
  for (const auto& [key, rates] : series) {
    double sum = 0.0;
    for (double r : rates) sum += r;
    const double avg = rates.empty() ? 0.0 : sum / static_cast<double>(rates.size());
    per_method[key.method].push_back(avg);
    std::printf("%-14s %8llu %14.6f %8zu\n", key.method.c_str(),
                static_cast<unsigned long long>(key.k), avg, rates.size());
  }
  std::map<std::string, double> means;
  for (const auto& [method, avgs] : per_method) {
    double sum = 0.0;
    for (double a : avgs) sum += a;
    means[method] = avgs.empty() ? 0.0 : sum / static_cast<double>(avgs.size());
  }
  std::printf("\n%-14s %14s\n", "method", "mean_over_k");
  for (const auto& [method, mean] : means) {
    std::printf("%-14s %14.6f\n", method.c_str(), mean);
  }
  if (means.size() > 1) {
    std::printf("\n%-14s %-14s %14s\n", "method_a", "method_b", "%improvement");
    for (const auto& [a, mean_a] : means) {
      for (const auto& [b, mean_b] : means) {
        if (a >= b || mean_a == 0.0) continue;
        std::printf("%-14s %-14s %14.2f\n", a.c_str(), b.c_str(),
                    100.0 * (mean_b - mean_a) / mean_a);
      }
    }
  }
  if (!plot_path.empty()) {
    std::ofstream out(plot_path);
    if (!out) {
      std::cerr << "vpop: cannot write '" << plot_path << "'\n";
      return VPOP_CONFIG_ERROR;
    }
    std::vector<std::string> methods;
    std::vector<std::uint64_t> ks;
    for (const auto& [key, rates] : series) {
      if (std::find(methods.begin(), methods.end(), key.method) == methods.end()) {
        methods.push_back(key.method);
      }
      if (std::find(ks.begin(), ks.end(), key.k) == ks.end()) ks.push_back(key.k);
    }
    std::sort(ks.begin(), ks.end());
    out << "# k";
    for (const auto& m : methods) out << ' ' << m;
    out << '\n';
    for (auto k : ks) {
      out << k;
      for (const auto& m : methods) {
        auto it = series.find({m, k});
        if (it == series.end() || it->second.empty()) {
          out << " nan";
        } else {
          double sum = 0.0;
          for (double r : it->second) sum += r;
          out << ' ' << sum / static_cast<double>(it->second.size());
        }
      }
      out << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven video popularity prediction and cache evaluation"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit the inter-arrival power law");
  std::string fit_trace, fit_out = "params.txt";
  RunFlags fit_flags;
  fit_cmd->add_option("--trace", fit_trace, "input trace")->required();
  fit_cmd->add_option("-o,--out", fit_out, "output params file");
  fit_flags.attach(fit_cmd);

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "infer transmission graphs on the relearn schedule");
  std::string infer_trace, infer_dir = "graphs";
  RunFlags infer_flags;
  infer_cmd->add_option("--trace", infer_trace, "input trace")->required();
  infer_cmd->add_option("-o,--out-dir", infer_dir, "output directory");
  infer_flags.attach(infer_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run the train/test hit-rate experiment");
  std::string sim_trace, sim_dir = "report";
  RunFlags sim_flags;
  sim_cmd->add_option("--trace", sim_trace, "input trace")->required();
  sim_cmd->add_option("-o,--out-dir", sim_dir, "output directory");
  sim_flags.attach(sim_cmd);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic trace from a planted world");
  std::string gen_world, gen_trace = "trace.csv", gen_truth;
  std::optional<double> gen_hours;
  std::optional<std::uint64_t> gen_seed;
  gen_cmd->add_option("--world", gen_world, "world JSON file")->required();
  gen_cmd->add_option("--trace", gen_trace, "output trace CSV");
  gen_cmd->add_option("--truth", gen_truth, "output ground-truth graph file");
  gen_cmd->add_option("--hours", gen_hours, "override duration_hours");
  gen_cmd->add_option("--seed", gen_seed, "override rng_seed");

  // report
  auto* rep_cmd = app.add_subcommand("report", "summarize a periods.csv report");
  std::string rep_periods, rep_plot;
  rep_cmd->add_option("--periods", rep_periods, "periods.csv from simulate")->required();
  rep_cmd->add_option("--plot-data", rep_plot, "write gnuplot-style k curves");

  CLI11_PARSE(app, argc, argv);

  if (fit_cmd->parsed()) {
    TraceHandle trace;
    if (int rc = open_trace(fit_trace, fit_flags, trace)) return rc;
    vpop_powerlaw params{};
    const std::string config = fit_flags.render();
    const vpop_status st = vpop_fit(trace.ptr, config.c_str(), fit_out.c_str(), &params);
    if (st != VPOP_OK) return report_failure(st, "fit");
    std::cout << "alpha=" << params.alpha << " t_min=" << params.t_min
              << " samples=" << params.samples << " -> " << fit_out << '\n';
    return 0;
  }

  if (infer_cmd->parsed()) {
    TraceHandle trace;
    if (int rc = open_trace(infer_trace, infer_flags, trace)) return rc;
    const std::string config = infer_flags.render();
    uint32_t written = 0;
    const vpop_status st = vpop_infer_to_dir(trace.ptr, config.c_str(), infer_dir.c_str(), &written);
    if (st != VPOP_OK) return report_failure(st, "infer");
    for (uint32_t i = 0; i < written; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "graph_%03u.csv", i);
      const std::string path = infer_dir + "/" + name;
      vpop_graph* g = nullptr;
      if (vpop_graph_open(path.c_str(), trace.ptr, &g) == VPOP_OK) {
        uint64_t edges = 0;
        vpop_graph_stats_get(g, nullptr, &edges);
        if (edges == 0) {
          std::cerr << "vpop: warning: " << name
                    << " is empty (no usable cascades in its history window)\n";
        }
        vpop_graph_free(g);
      }
    }
    std::cout << written << " graph file(s) -> " << infer_dir << '\n';
    return 0;
  }

  if (sim_cmd->parsed()) {
    TraceHandle trace;
    if (int rc = open_trace(sim_trace, sim_flags, trace)) return rc;
    const std::string config = sim_flags.render();
    const vpop_status st = vpop_simulate(trace.ptr, config.c_str(), sim_dir.c_str());
    if (st != VPOP_OK) return report_failure(st, "simulate");
    std::cout << "report -> " << sim_dir << "/{periods.csv,summary.csv,hitrate_vs_k.dat}\n";
    return 0;
  }

  if (gen_cmd->parsed()) {
    std::ifstream in(gen_world);
    if (!in) {
      std::cerr << "vpop: cannot open world file '" << gen_world << "'\n";
      return VPOP_CONFIG_ERROR;
    }
    json world = json::parse(in, nullptr, false);
    if (world.is_discarded() || !world.is_object()) {
      std::cerr << "vpop: malformed world file '" << gen_world << "'\n";
      return VPOP_CONFIG_ERROR;
    }
    if (gen_hours) world["duration_hours"] = *gen_hours;
    if (gen_seed) world["rng_seed"] = *gen_seed;
    const std::string world_text = world.dump();
    const vpop_status st = vpop_generate(world_text.c_str(), gen_trace.c_str(),
                                         gen_truth.empty() ? nullptr : gen_truth.c_str());
    if (st != VPOP_OK) return report_failure(st, "generate");
    std::cout << "trace -> " << gen_trace;
    if (!gen_truth.empty()) std::cout << ", truth -> " << gen_truth;
    std::cout << '\n';
    return 0;
  }

  if (rep_cmd->parsed()) return run_report(rep_periods, rep_plot);
  return 0;
}
