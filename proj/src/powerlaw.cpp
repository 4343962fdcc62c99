#include "vpop/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "vpop/errors.hpp"

namespace vpop {

double pdf(const PowerLawParams& p, double t) {
  if (!(t > 0.0)) throw std::domain_error("powerlaw pdf: t must be positive");
  const double tt = std::max(t, p.t_min);
  return (p.alpha - 1.0) / p.t_min * std::pow(tt / p.t_min, -p.alpha);
}

double quantile(const PowerLawParams& p, double prob) {
  if (!(prob >= 0.0 && prob < 1.0)) {
    throw std::domain_error("powerlaw quantile: p must be in [0,1)");
  }
  return p.t_min * std::pow(1.0 - prob, -1.0 / (p.alpha - 1.0));
}

double incubation_weight(const PowerLawParams& p, double gap) {
  if (!(gap > 0.0)) throw std::domain_error("incubation_weight: gap must be positive");
  const double tt = std::max(gap, p.t_min);
  return std::pow(tt / p.t_min, -p.alpha);
}

PowerLawParams fit(std::span<const double> samples) {
  if (samples.size() < 2) throw DataError("powerlaw fit: need at least 2 samples");
  double t_min = samples.front();
  for (double s : samples) {
    if (!(s > 0.0)) throw std::domain_error("powerlaw fit: non-positive sample");
    t_min = std::min(t_min, s);
  }
  return fit(samples, t_min);
}

PowerLawParams fit(std::span<const double> samples, double t_min) {
  if (samples.size() < 2) throw DataError("powerlaw fit: need at least 2 samples");
  if (!(t_min > 0.0)) throw std::domain_error("powerlaw fit: t_min must be positive");
  double log_sum = 0.0;
  for (double s : samples) {
    if (!(s > 0.0)) throw std::domain_error("powerlaw fit: non-positive sample");
    if (s < t_min) throw std::domain_error("powerlaw fit: sample below t_min");
    log_sum += std::log(s / t_min);
  }
  double alpha = kAlphaMax;
  if (log_sum > 0.0) {
    alpha = std::min(1.0 + static_cast<double>(samples.size()) / log_sum, kAlphaMax);
  }
  return {alpha, t_min};
}

double clamp_gap(double raw, double resolution) {
  if (!(resolution > 0.0)) throw std::domain_error("clamp_gap: resolution must be positive");
  return std::max(raw, resolution);
}

double mean_interarrival(const Cascade& c, double resolution) {
  if (c.events.size() < 2) {
    throw std::domain_error("mean_interarrival: cascade needs at least 2 events");
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < c.events.size(); ++i) {
    sum += clamp_gap(c.events[i].time - c.events[i - 1].time, resolution);
  }
  return sum / static_cast<double>(c.events.size() - 1);
}

void save_params(std::ostream& out, const PowerLawParams& p,
                 std::uint64_t n_samples, std::string_view config_hash) {
  char buf[40];
  out << "# vpop powerlaw v1\n";
  out << "# config_hash=" << config_hash << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", p.alpha);
  out << "alpha=" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", p.t_min);
  out << "t_min=" << buf << '\n';
  out << "samples=" << n_samples << '\n';
}

PowerLawParams load_params(std::istream& in, std::uint64_t* n_samples) {
  PowerLawParams p{0.0, 0.0};
  bool have_alpha = false;
  bool have_tmin = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("powerlaw record: bad line '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "alpha") {
      p.alpha = std::stod(value);
      have_alpha = true;
    } else if (key == "t_min") {
      p.t_min = std::stod(value);
      have_tmin = true;
    } else if (key == "samples") {
      if (n_samples) *n_samples = std::stoull(value);
    } else {
      throw DataError("powerlaw record: unknown key '" + key + "'");
    }
  }
  if (!have_alpha || !have_tmin) throw DataError("powerlaw record: missing alpha or t_min");
  return p;
}

}  // namespace vpop
