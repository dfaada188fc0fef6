#include "clubcascade/bounds.hpp"

#include "clubcascade/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace clubcascade::bounds {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::invalid_config, what);
}

}  // namespace

void BoundsConfig::validate() const {
  require(d > 0 && lambda > 0 && K > 0 && L_norm > 0 && u > 0 && m > 0 && T > 0,
          "bounds config entries must be positive");
  require(delta > 0 && delta < 1, "delta must lie in (0, 1)");
  require(gamma > 0 && gamma <= 2, "gamma must lie in (0, 2]");
  require(lambda_x > 0 && lambda_x <= 1, "lambda_x must lie in (0, 1]");
  require(c_mu > 0 && kappa_mu > 0, "link constants must be positive");
}

double beta_linear(double t, double delta, double d, double lambda) {
  return std::sqrt(d * std::log1p(t / (lambda * d)) + 2.0 * std::log(1.0 / delta)) +
         std::sqrt(lambda);
}

double beta_glm(double T, double delta, double d, double lambda_x, double c_mu) {
  const double log_term = std::max(0.0, std::log(T / d));
  return std::sqrt(8.0 / lambda_x + d * log_term + 2.0 * std::log(1.0 / delta)) / c_mu;
}

double alpha_default(double d, double lambda_x) { return std::sqrt(32.0 * d / lambda_x); }

double alpha_default_glm(double d, double lambda_x, double c_mu) {
  return std::sqrt(32.0 * d / (lambda_x * c_mu * c_mu));
}

double det_upper_bound(double trace_m0, double sum_sq_norms, double d) {
  return std::pow((trace_m0 + sum_sq_norms) / d, d);
}

double det_upper_bound_ridge(double lambda, double n, double L, double d) {
  return std::pow(lambda + n * L * L / d, d);
}

double self_norm_sum_bound(double n, double K, double d, double lambda, double L) {
  if (lambda < K * L * L) {
    warn("self_norm_sum_bound: lambda < K L^2, the bound's hypothesis does not hold");
  }
  return std::sqrt(2.0 * d * n * K * std::log1p(n * K * L * L / (lambda * d)));
}

double lambda_min_lower(double t, double lambda_x, double L, double delta, double d) {
  const double l2 = L * L;
  const double l4 = l2 * l2;
  const double a = std::log((t * l4 + 1.0) * (t * l4 + 3.0) * d / delta);
  const double value = t * lambda_x - (l2 / 3.0) * std::sqrt(18.0 * t * a + a * a) - (l2 / 3.0) * a;
  return std::max(0.0, value);
}

double lambda_min_threshold(double lambda_x, double d, double delta) {
  if (delta > 0.125) {
    throw Error(Errc::delta_too_large, "delta = " + std::to_string(delta) + " exceeds 1/8");
  }
  const double lx2 = lambda_x * lambda_x;
  return 256.0 / lx2 * std::log(128.0 * d / (lx2 * delta));
}

double lambda_min_eighth_rate_threshold(double lambda_x, double d, double delta) {
  const double lx2 = lambda_x * lambda_x;
  return 1024.0 / lx2 * std::log(512.0 * d / (lx2 * delta));
}

double bernstein_rounds(double p, double B, double n, double delta) {
  return 16.0 / p * std::log(n / delta) + 4.0 * B / p;
}

double log_dominance_threshold(double a, double b) {
  if (!(a > 0.0 && b > 0.0) || a * b < std::numbers::e) {
    throw Error(Errc::hypothesis_violated, "log_dominance_threshold needs a, b > 0 and ab >= e");
  }
  return 2.0 * a * std::log(a * b);
}

double t0_exploration(double u, double d, double gamma, double lambda_x, double delta, double T) {
  const double lx2 = lambda_x * lambda_x;
  const double cluster_term = 512.0 * d / (gamma * gamma * lambda_x) * std::log(4.0 * u / delta);
  const double eigen_term = 256.0 / lx2 * std::log(128.0 * d / (lx2 * delta));
  return 16.0 * u * std::log(4.0 * u * T / delta) + 4.0 * u * std::max(cluster_term, eigen_term);
}

double gamma_confidence_threshold(double d, double gamma, double lambda_x, double u, double delta) {
  return 512.0 * d / (gamma * gamma * lambda_x) * std::log(4.0 * u / delta);
}

double gamma_confidence_quotient(double T, double d, double lambda, double lambda_x, double u,
                                 double delta) {
  const double numerator =
      std::sqrt(d * std::log1p(T / (lambda * d)) + 2.0 * std::log(4.0 * u / delta)) +
      std::sqrt(lambda);
  return numerator / std::sqrt(lambda + T * lambda_x / 8.0);
}

double regret_main_term(const BoundsConfig& cfg) {
  const double width = std::sqrt(cfg.d * std::log1p(cfg.T / (cfg.lambda * cfg.d)) +
                                 2.0 * std::log(4.0 * cfg.m * cfg.T)) +
                       std::sqrt(cfg.lambda);
  const double self_norm = std::sqrt(2.0 * cfg.d * cfg.m * cfg.K * cfg.T *
                                     std::log1p(cfg.T * cfg.K / (cfg.lambda * cfg.d)));
  return 2.0 * width * self_norm;
}

double regret_upper_bound(const BoundsConfig& cfg) {
  cfg.validate();
  const double main = regret_main_term(cfg);
  if (cfg.m <= 1.0) return main;
  return main + t0_exploration(cfg.u, cfg.d, cfg.gamma, cfg.lambda_x, cfg.delta, cfg.T);
}

}  // namespace clubcascade::bounds
