#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>

#include "vpop/trace.hpp"

namespace vpop {

// Continuous power law over [t_min, inf):
//   density(t) = ((alpha - 1) / t_min) * (t / t_min)^(-alpha)
struct PowerLawParams {
  double alpha = 2.5;  // > 1
  double t_min = 1.0;  // seconds, > 0
};

// Cap for the degenerate all-samples-equal fit.
inline constexpr double kAlphaMax = 50.0;

// Density, clamped to its t_min value on (0, t_min). Throws
// std::domain_error for t <= 0.
double pdf(const PowerLawParams& p, double t);

// Inverse CDF; p in [0, 1). quantile(p, 0) == t_min.
double quantile(const PowerLawParams& p, double prob);

// Density rescaled by its maximum (the value at t_min) so it can be used
// as a probability multiplier in (0, 1].
double incubation_weight(const PowerLawParams& p, double gap);

// Closed-form MLE with t_min fixed at the sample minimum. Needs >= 2
// samples (DataError otherwise); non-positive samples are a domain error.
// alpha is capped at kAlphaMax when all samples coincide.
PowerLawParams fit(std::span<const double> samples);

// Same, with an externally supplied cutoff (samples must be >= t_min).
PowerLawParams fit(std::span<const double> samples, double t_min);

// max(raw, resolution). resolution must be > 0.
double clamp_gap(double raw, double resolution);

// Arithmetic mean of successive event gaps, each clamped to the trace
// resolution. Throws std::domain_error for cascades with < 2 events.
double mean_interarrival(const Cascade& c, double resolution);

// Small text record (alpha, t_min, sample count) used in run reports.
void save_params(std::ostream& out, const PowerLawParams& p,
                 std::uint64_t n_samples, std::string_view config_hash);
PowerLawParams load_params(std::istream& in, std::uint64_t* n_samples = nullptr);

}  // namespace vpop
