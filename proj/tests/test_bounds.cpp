#include "doctest.h"
#include "oracles.hpp"

#include "clubcascade/bounds.hpp"
#include "clubcascade/bounds_check.hpp"
#include "clubcascade/error.hpp"

#include <cmath>
#include <sstream>

using namespace clubcascade;
using namespace clubcascade::bounds;

namespace {

const double e = std::exp(1.0);

}  // namespace

TEST_CASE("beta_linear examples and monotonicity") {
  CHECK(beta_linear(0, 1.0, 20, 4.0) == doctest::Approx(2.0));
  CHECK(beta_linear(e - 1.0, 1.0, 1, 1.0) == doctest::Approx(2.0));
  CHECK(beta_linear(100, 0.1, 5, 1.0) <= beta_linear(200, 0.1, 5, 1.0));
  CHECK(beta_linear(100, 0.1, 5, 1.0) <= beta_linear(100, 0.01, 5, 1.0));
}

TEST_CASE("beta_glm examples") {
  CHECK(beta_glm(3, 1.0, 3, 8.0, 1.0) == doctest::Approx(1.0));
  CHECK(beta_glm(1e4, 0.1, 20, 0.05, 0.5) == doctest::Approx(2.0 * beta_glm(1e4, 0.1, 20, 0.05, 1.0)));
  const double direct = std::sqrt(8.0 / 0.05 + 20.0 * std::log(1e4 / 20.0) + 2.0 * std::log(10.0)) / 0.105;
  CHECK(beta_glm(1e4, 0.1, 20, 0.05, 0.105) == doctest::Approx(direct));
  // Below T = d the log term is clamped at zero.
  CHECK(beta_glm(1, 1.0, 3, 8.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("alpha defaults") {
  CHECK(alpha_default(2, 1.0) == doctest::Approx(8.0));
  CHECK(alpha_default_glm(7, 0.3, 1.0) == doctest::Approx(alpha_default(7, 0.3)));
  CHECK(alpha_default(20, 0.05) == doctest::Approx(113.137).epsilon(1e-5));
}

TEST_CASE("determinant bound examples and cofactor oracle") {
  for (double d : {1.0, 3.0, 7.0}) CHECK(det_upper_bound_ridge(1.0, 0, 1.0, d) == doctest::Approx(1.0));
  CHECK(det_upper_bound_ridge(1.0, 1, 1.0, 1) == doctest::Approx(2.0));

  auto gen = rng::stream(1, rng::Purpose::trial);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix M = Matrix::Identity(3, 3);
    double prev = 1.0, sum_sq = 0.0;
    for (int n = 0; n < 10; ++n) {
      const Vector x = oracle::random_in_ball(gen, 3);
      M += x * x.transpose();
      sum_sq += x.squaredNorm();
      const double det = oracle::cofactor_det(M);
      CHECK(det <= det_upper_bound(3.0, sum_sq, 3) * (1 + 1e-12));
      CHECK(det <= det_upper_bound_ridge(1.0, n + 1, 1.0, 3) * (1 + 1e-12));
      CHECK(det >= prev * (1 - 1e-12));
      prev = det;
    }
  }
}

TEST_CASE("self_norm_sum_bound examples") {
  CHECK(self_norm_sum_bound(1, 1, 1, 1.0, 1.0) == doctest::Approx(std::sqrt(2.0 * std::log(2.0))));
  CHECK(self_norm_sum_bound(1, 1, 1, 1.0, 1.0) == doctest::Approx(1.17741).epsilon(1e-5));
  CHECK(self_norm_sum_bound(0, 4, 5, 4.0, 1.0) == 0.0);
  double prev = 0.0;
  for (double n = 1e5; n <= 1e11; n *= 4) {
    const double v = self_norm_sum_bound(n, 4, 5, 4.0, 1.0);
    CHECK(v > prev);
    CHECK(self_norm_sum_bound(4 * n, 4, 5, 4.0, 1.0) / v < 2.2);
    prev = v;
  }
}

TEST_CASE("lambda_min_lower and thresholds") {
  CHECK(lambda_min_lower(0, 0.1, 1.0, 0.05, 5) == 0.0);
  CHECK(lambda_min_lower(10, 0.1, 1.0, 0.05, 5) == 0.0);
  const double t = 1e6, A = std::log((t + 1) * (t + 3) * 5 / 0.05);
  const double direct = t * 0.1 - std::sqrt(18 * t * A + A * A) / 3.0 - A / 3.0;
  CHECK(lambda_min_lower(t, 0.1, 1.0, 0.05, 5) == doctest::Approx(direct));
  CHECK(direct > 0.0);

  CHECK(lambda_min_threshold(1.0, 1, 0.125) == doctest::Approx(256.0 * std::log(1024.0)));
  CHECK(lambda_min_threshold(1.0, 1, 0.125) == doctest::Approx(1774.6).epsilon(1e-4));
  CHECK(lambda_min_threshold(0.5, 3, 0.1) > lambda_min_threshold(0.6, 3, 0.1));
  CHECK_THROWS_AS(lambda_min_threshold(1.0, 1, 0.2), Error);
  CHECK(lambda_min_eighth_rate_threshold(1.0, 1, 0.1) ==
        doctest::Approx(1024.0 * std::log(512.0 / 0.1)));
}

TEST_CASE("bernstein_rounds examples") {
  CHECK(bernstein_rounds(0.5, 1.0, 0.3, 0.3) == doctest::Approx(8.0));
  CHECK(bernstein_rounds(0.2, 2.0, 10, 0.1) - bernstein_rounds(0.2, 1.0, 10, 0.1) ==
        doctest::Approx(4.0 / 0.2));
}

TEST_CASE("log_dominance_threshold examples and sweep") {
  CHECK(log_dominance_threshold(1.0, e) == doctest::Approx(2.0));
  CHECK(2.0 >= std::log(2.0 * e));
  CHECK(log_dominance_threshold(3.0, e / 3.0) == doctest::Approx(6.0));
  CHECK_THROWS_AS(log_dominance_threshold(1.0, 2.0), Error);

  auto gen = rng::stream(2, rng::Purpose::trial);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = std::exp(6.0 * rng::uniform01(gen) - 3.0);
    const double b = std::max(e / a, std::exp(6.0 * rng::uniform01(gen) - 3.0)) * (1.0 + rng::uniform01(gen));
    const double t = log_dominance_threshold(a, b);
    CHECK(t >= a * std::log(b * t) * (1 - 1e-12));
    CHECK(10 * t >= a * std::log(10 * b * t));
  }
}

TEST_CASE("t0_exploration monotonicity and scaling") {
  const double base = t0_exploration(40, 20, std::sqrt(2.0), 0.05, 0.01, 1e5);
  CHECK(t0_exploration(40, 20, 1.0, 0.05, 0.01, 1e5) > base);
  CHECK(t0_exploration(40, 20, std::sqrt(2.0), 0.04, 0.01, 1e5) > base);
  for (double u : {10.0, 40.0, 100.0})
    CHECK(t0_exploration(2 * u, 20, 1.0, 0.05, 0.01, 1e5) / t0_exploration(u, 20, 1.0, 0.05, 0.01, 1e5) <= 2.5);
  const double g2 = 2.0;
  const double direct = 16 * 40 * std::log(4 * 40 * 1e5 / 0.01) +
                        4 * 40 * std::max(512 * 20 / (g2 * 0.05) * std::log(4 * 40 / 0.01),
                                          256 / (0.05 * 0.05) * std::log(128 * 20 / (0.05 * 0.05 * 0.01)));
  CHECK(base == doctest::Approx(direct));
}

TEST_CASE("gamma threshold and quotient") {
  const double thr = gamma_confidence_threshold(5, 1.0, 0.5, 10, 0.01);
  CHECK(gamma_confidence_quotient(thr, 5, 1.0, 0.5, 10, 0.01) <= 0.5);
  CHECK(gamma_confidence_threshold(5, 2.0, 0.5, 10, 0.01) == doctest::Approx(thr / 4.0));
  CHECK(gamma_confidence_threshold(5, 0.5, 0.5, 10, 0.01) == doctest::Approx(thr * 4.0));
}

TEST_CASE("regret bound structure") {
  BoundsConfig cfg;
  cfg.d = 20;
  cfg.m = 5;
  cfg.K = 4;
  cfg.lambda = 4;
  cfg.T = 2e4;
  const double d = 20, m = 5, K = 4, lambda = 4, T = 2e4;
  const double main = 2 * (std::sqrt(d * std::log(1 + T / (lambda * d)) + 2 * std::log(4 * m * T)) + 2.0) *
                      std::sqrt(2 * d * m * K * T * std::log(1 + T * K / (lambda * d)));
  CHECK(regret_main_term(cfg) == doctest::Approx(main));
  CHECK(regret_upper_bound(cfg) > regret_main_term(cfg));
  for (double BoundsConfig::*field : {&BoundsConfig::T, &BoundsConfig::m, &BoundsConfig::K, &BoundsConfig::d}) {
    auto bigger = cfg;
    bigger.*field *= 2;
    CHECK(regret_upper_bound(bigger) > regret_upper_bound(cfg));
  }
  auto one = cfg;
  one.m = 1;
  CHECK(regret_upper_bound(one) == doctest::Approx(regret_main_term(one)));
  cfg.delta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("bounds check harness on reduced trial counts") {
  CheckConfig cfg;
  cfg.det_trials = 50;
  cfg.self_norm_trials = 50;
  cfg.lambda_min_trials = 10;
  cfg.lambda_min_rounds = 2000;
  cfg.bernstein_trials = 200;
  cfg.log_dominance_trials = 200;
  cfg.gamma_trials = 200;
  cfg.ellipsoid_trials = 20;
  cfg.ellipsoid_rounds = 500;
  const auto results = run_all_checks(cfg);
  CHECK(results.size() == 7);
  for (const auto& r : results) CHECK_MESSAGE(r.passed(), r.name << ": " << r.detail);
  CHECK(all_passed(results));

  cfg.invert = true;
  for (const auto& r : run_all_checks(cfg)) CHECK_FALSE_MESSAGE(r.passed(), r.name);
}

TEST_CASE("zero-trial configuration gives an empty passing table") {
  CheckConfig cfg;
  cfg.det_trials = cfg.self_norm_trials = cfg.lambda_min_trials = 0;
  cfg.bernstein_trials = cfg.log_dominance_trials = cfg.gamma_trials = cfg.ellipsoid_trials = 0;
  const auto results = run_all_checks(cfg);
  CHECK(results.empty());
  CHECK(all_passed(results));
  std::ostringstream out;
  write_table(out, results);
  CHECK(out.str().find("overall: pass") != std::string::npos);
}
