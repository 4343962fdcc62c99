#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "vpop/errors.hpp"
#include "vpop/powerlaw.hpp"

using namespace vpop;

TEST_CASE("pdf hand values") {
  PowerLawParams p{2.0, 1.0};
  CHECK(pdf(p, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pdf(p, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("pdf ratio between t_min and 2*t_min is 2^alpha") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> alpha_dist(1.2, 6.0);
  std::uniform_real_distribution<double> tmin_dist(0.1, 500.0);
  for (int i = 0; i < 50; ++i) {
    PowerLawParams p{alpha_dist(rng), tmin_dist(rng)};
    const double ratio = pdf(p, p.t_min) / pdf(p, 2.0 * p.t_min);
    CHECK(ratio == doctest::Approx(std::pow(2.0, p.alpha)).epsilon(1e-12));
  }
}

TEST_CASE("pdf clamps below t_min and rejects non-positive t") {
  PowerLawParams p{2.5, 10.0};
  CHECK(pdf(p, 3.0) == pdf(p, 10.0));
  CHECK_THROWS_AS(pdf(p, 0.0), std::domain_error);
  CHECK_THROWS_AS(pdf(p, -1.0), std::domain_error);
}

TEST_CASE("pdf integrates to one") {
  for (PowerLawParams p : {PowerLawParams{2.5, 1.0}, PowerLawParams{1.8, 60.0},
                           PowerLawParams{3.5, 0.5}}) {
    // integrate in log-space out to where the analytic tail is < 1e-9
    const double upper = p.t_min * std::pow(1e-9, 1.0 / (1.0 - p.alpha));
    const double integral = testutil::simpson(
        [&](double logt) {
          const double t = std::exp(logt);
          return testutil::pdf_oracle(p.alpha, p.t_min, t) * t;
        },
        std::log(p.t_min), std::log(upper), 20000);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
    // and the library pdf matches the oracle pointwise
    for (double t : {p.t_min, 2 * p.t_min, 17 * p.t_min}) {
      CHECK(pdf(p, t) == doctest::Approx(testutil::pdf_oracle(p.alpha, p.t_min, t)));
    }
  }
}

TEST_CASE("pdf is non-increasing past t_min") {
  PowerLawParams p{2.2, 5.0};
  double prev = pdf(p, p.t_min);
  for (double t = p.t_min; t < 100 * p.t_min; t *= 1.07) {
    const double cur = pdf(p, t);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("fit closed form on {e, e^2} with external cutoff") {
  const std::vector<double> samples{std::exp(1.0), std::exp(2.0)};
  const PowerLawParams p = fit(samples, 1.0);
  CHECK(p.alpha == doctest::Approx(1.0 + 2.0 / 3.0).epsilon(1e-12));
  CHECK(p.t_min == 1.0);
}

TEST_CASE("fit caps alpha when all samples coincide") {
  const std::vector<double> samples{4.0, 4.0, 4.0};
  const PowerLawParams p = fit(samples);
  CHECK(p.alpha == kAlphaMax);
  CHECK(p.t_min == 4.0);
}

TEST_CASE("fit rejects degenerate input") {
  CHECK_THROWS_AS(fit(std::vector<double>{}), DataError);
  CHECK_THROWS_AS(fit(std::vector<double>{1.0}), DataError);
  CHECK_THROWS_AS(fit(std::vector<double>{1.0, -2.0}), std::domain_error);
  CHECK_THROWS_AS(fit(std::vector<double>{1.0, 2.0}, 1.5), std::domain_error);
}

TEST_CASE("fit recovers alpha from inverse-CDF samples") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    std::mt19937_64 rng(seed);
    std::vector<double> samples;
    samples.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
      samples.push_back(testutil::powerlaw_sample(2.5, 1.0, rng));
    }
    const PowerLawParams p = fit(samples);
    CHECK(std::abs(p.alpha - 2.5) <= 0.05);
    CHECK(p.t_min >= 1.0);
  }
}

TEST_CASE("fit is scale-equivariant") {
  std::mt19937_64 rng(9);
  std::vector<double> samples;
  for (int i = 0; i < 500; ++i) samples.push_back(testutil::powerlaw_sample(2.0, 3.0, rng));
  const PowerLawParams base = fit(samples);
  for (double c : {0.25, 7.0, 3600.0}) {
    std::vector<double> scaled(samples);
    for (double& s : scaled) s *= c;
    const PowerLawParams p = fit(scaled);
    CHECK(p.alpha == doctest::Approx(base.alpha).epsilon(1e-9));
    CHECK(p.t_min == doctest::Approx(base.t_min * c).epsilon(1e-12));
  }
}

TEST_CASE("quantile inverts the distribution") {
  PowerLawParams p{2.5, 4.0};
  CHECK(quantile(p, 0.0) == 4.0);
  for (double prob : {0.1, 0.5, 0.9, 0.999}) {
    const double t = quantile(p, prob);
    const double cdf = 1.0 - std::pow(t / p.t_min, 1.0 - p.alpha);
    CHECK(cdf == doctest::Approx(prob).epsilon(1e-12));
  }
  CHECK_THROWS_AS(quantile(p, 1.0), std::domain_error);
}

TEST_CASE("incubation weight is the density rescaled to (0,1]") {
  PowerLawParams p{2.5, 60.0};
  CHECK(incubation_weight(p, 60.0) == 1.0);
  CHECK(incubation_weight(p, 10.0) == 1.0);  // clamped region
  CHECK(incubation_weight(p, 120.0) ==
        doctest::Approx(pdf(p, 120.0) / pdf(p, 60.0)).epsilon(1e-12));
}

TEST_CASE("clamp_gap") {
  CHECK(clamp_gap(0.0, 1.0) == 1.0);
  CHECK(clamp_gap(5.0, 1.0) == 5.0);
  CHECK(clamp_gap(0.5, 1.0) == 1.0);
  CHECK_THROWS_AS(clamp_gap(1.0, 0.0), std::domain_error);
}

TEST_CASE("mean_interarrival") {
  Cascade c{0, {{0, 0}, {0, 2}, {0, 4}}};
  CHECK(mean_interarrival(c, 1.0) == 2.0);
  Cascade zeros{0, {{0, 0}, {1, 0}, {2, 0}}};
  CHECK(mean_interarrival(zeros, 1.0) == 1.0);
  Cascade pair{0, {{0, 0}, {1, 1}}};
  CHECK(mean_interarrival(pair, 1.0) == 1.0);
  CHECK_THROWS_AS(mean_interarrival(Cascade{0, {{0, 1}}}, 1.0), std::domain_error);
}

TEST_CASE("params record round-trips") {
  PowerLawParams p{2.3456789012345, 617.2839};
  std::ostringstream out;
  save_params(out, p, 4321, "cafebabe00112233");
  std::istringstream in(out.str());
  std::uint64_t samples = 0;
  const PowerLawParams q = load_params(in, &samples);
  CHECK(q.alpha == p.alpha);
  CHECK(q.t_min == p.t_min);
  CHECK(samples == 4321);
}
