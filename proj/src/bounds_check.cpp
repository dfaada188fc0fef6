#include "clubcascade/bounds_check.hpp"

#include "clubcascade/bounds.hpp"
#include "clubcascade/linalg.hpp"
#include "clubcascade/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace clubcascade::bounds {

namespace {

// Suite tags keep each suite's trial streams disjoint.
enum class Suite : std::uint64_t {
  det = 1,
  self_norm,
  lambda_min,
  bernstein,
  log_dominance,
  gamma,
  ellipsoid,
};

rng::Engine trial_stream(const CheckConfig& cfg, Suite suite, std::size_t trial) {
  return rng::stream(rng::mix(cfg.seed) ^ static_cast<std::uint64_t>(suite), rng::Purpose::trial,
                     trial);
}

double uniform(rng::Engine& gen, double lo, double hi) { return lo + (hi - lo) * rng::uniform01(gen); }

std::size_t uniform_int(rng::Engine& gen, std::size_t lo, std::size_t hi) {
  return lo + rng::uniform_index(gen, hi - lo + 1);
}

// Uniform direction scaled by a uniform radius in [0, 1].
Vector ball_vector(rng::Engine& gen, Index dim) {
  Vector g(dim);
  for (Index i = 0; i < dim; ++i) g[i] = rng::normal(gen);
  return g * (rng::uniform01(gen) / g.norm());
}

// Unit vector with nonnegative entries.
Vector nonnegative_unit(rng::Engine& gen, Index dim) {
  Vector g(dim);
  for (Index i = 0; i < dim; ++i) g[i] = std::abs(rng::normal(gen));
  return g / g.norm();
}

// Tally of one suite. `record` takes the violation amount (positive means
// the bound failed in this trial) and applies the negative-control flip.
class Tally {
 public:
  Tally(std::string name, std::size_t trials, std::size_t allowed, bool invert)
      : invert_(invert) {
    result_.name = std::move(name);
    result_.trials = trials;
    result_.allowed = allowed;
    result_.worst_margin = trials == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }

  void record(double margin) {
    result_.worst_margin = std::max(result_.worst_margin, margin);
    const bool violated = margin > 0.0;
    if (violated != invert_) ++result_.violations;
  }

  CheckResult finish(std::string detail = {}) {
    result_.detail = std::move(detail);
    return result_;
  }

 private:
  bool invert_;
  CheckResult result_;
};

std::size_t budget(double fraction, std::size_t trials) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(trials)));
}

}  // namespace

CheckResult check_det_bound(const CheckConfig& cfg) {
  Tally tally("det_upper_bound", cfg.det_trials, 0, cfg.invert);
  for (std::size_t trial = 0; trial < cfg.det_trials; ++trial) {
    rng::Engine gen = trial_stream(cfg, Suite::det, trial);
    const auto dim = static_cast<Index>(uniform_int(gen, 1, 5));
    const std::size_t n = uniform_int(gen, 1, 50);
    const double lambda = uniform(gen, 0.5, 2.0);
    SymMatrix m = SymMatrix::identity(dim, lambda);
    double sum_sq = 0.0;
    double prev_log_det = cholesky(m).log_determinant();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const Vector x = ball_vector(gen, dim);
      m.add_outer(x);
      sum_sq += x.squaredNorm();
      const double log_det = cholesky(m).log_determinant();
      const double log_bound =
          std::log(det_upper_bound(lambda * static_cast<double>(dim), sum_sq, static_cast<double>(dim)));
      worst = std::max(worst, log_det - log_bound - 1e-12);
      // The determinant must also be nondecreasing along the sequence.
      worst = std::max(worst, prev_log_det - log_det - 1e-12);
      prev_log_det = log_det;
    }
    tally.record(worst);
  }
  return tally.finish("log det(M_n) - log bound, and monotonicity in n");
}

CheckResult check_self_norm_sum(const CheckConfig& cfg) {
  Tally tally("self_norm_sum_bound", cfg.self_norm_trials, 0, cfg.invert);
  for (std::size_t trial = 0; trial < cfg.self_norm_trials; ++trial) {
    rng::Engine gen = trial_stream(cfg, Suite::self_norm, trial);
    const auto dim = static_cast<Index>(uniform_int(gen, 1, 5));
    const std::size_t n = uniform_int(gen, 1, 50);
    const std::size_t k = uniform_int(gen, 1, 4);
    const double lambda = static_cast<double>(k) * uniform(gen, 1.0, 2.0);
    SymMatrix m = SymMatrix::identity(dim, lambda);
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const CholeskyFactor chol = cholesky(m);
      for (std::size_t j = 0; j < k; ++j) {
        const Vector x = ball_vector(gen, dim);
        sum += std::sqrt(quad_form_inv(chol, x));
        m.add_outer(x);
      }
    }
    const double bound = self_norm_sum_bound(static_cast<double>(n), static_cast<double>(k),
                                             static_cast<double>(dim), lambda, 1.0);
    tally.record(sum - bound);
  }
  return tally.finish("sum of ||x||_{M^-1} - bound, lambda >= K L^2");
}

CheckResult check_lambda_min(const CheckConfig& cfg) {
  const std::size_t d = cfg.lambda_min_dim;
  const double lambda_x = 1.0 / static_cast<double>(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Tally tally("lambda_min_lower", cfg.lambda_min_trials, budget(cfg.delta, cfg.lambda_min_trials),
              cfg.invert);
  const auto dim = static_cast<Index>(d);
  std::vector<double> lower(cfg.lambda_min_rounds + 1);
  for (std::size_t t = 0; t <= cfg.lambda_min_rounds; ++t) {
    lower[t] = lambda_min_lower(static_cast<double>(t), lambda_x, 1.0, cfg.delta,
                                static_cast<double>(d));
  }
  for (std::size_t trial = 0; trial < cfg.lambda_min_trials; ++trial) {
    rng::Engine gen = trial_stream(cfg, Suite::lambda_min, trial);
    SymMatrix s(dim);
    double worst = -std::numeric_limits<double>::infinity();
    Vector x(dim);
    for (std::size_t t = 1; t <= cfg.lambda_min_rounds; ++t) {
      // Rademacher coordinates over √d: ‖x‖ = 1 and E[x xᵀ] = I/d.
      for (Index i = 0; i < dim; ++i) x[i] = (gen() & 1U) ? scale : -scale;
      s.add_outer(x);
      if (lower[t] <= 0.0) continue;
      Matrix shifted = s.dense();
      shifted.diagonal().array() -= lower[t];
      if (Eigen::LLT<Matrix>(shifted).info() != Eigen::Success) {
        worst = std::max(worst, lower[t] - min_eigenvalue(s));
        break;
      }
    }
    if (worst == -std::numeric_limits<double>::infinity()) {
      const double final_lower = lower[cfg.lambda_min_rounds];
      worst = final_lower > 0.0 ? final_lower - min_eigenvalue(s) : -1.0;
    }
    tally.record(worst);
  }
  return tally.finish("any-t failure of lambda_min(S_t) >= bound, Rademacher items, d=" +
                      std::to_string(d));
}

CheckResult check_bernstein(const CheckConfig& cfg) {
  constexpr double p = 0.1;
  constexpr double b = 5.0;
  constexpr double n = 1e4;
  constexpr double delta = 0.05;
  const auto rounds = static_cast<std::size_t>(std::ceil(bernstein_rounds(p, b, n, delta)));
  Tally tally("bernstein_rounds", cfg.bernstein_trials, budget(delta, cfg.bernstein_trials),
              cfg.invert);
  for (std::size_t trial = 0; trial < cfg.bernstein_trials; ++trial) {
    rng::Engine gen = trial_stream(cfg, Suite::bernstein, trial);
    std::size_t sum = 0;
    for (std::size_t t = 0; t < rounds; ++t) sum += rng::bernoulli(gen, p) ? 1 : 0;
    tally.record(b - static_cast<double>(sum));
  }
  return tally.finish("Bernoulli(0.1) sums after " + std::to_string(rounds) + " rounds vs 5");
}

CheckResult check_log_dominance(const CheckConfig& cfg) {
  Tally tally("log_dominance_threshold", cfg.log_dominance_trials, 0, cfg.invert);
  for (std::size_t trial = 0; trial < cfg.log_dominance_trials; ++trial) {
    rng::Engine gen = trial_stream(cfg, Suite::log_dominance, trial);
    const double a = std::exp(uniform(gen, -3.0, 5.0));
    const double b = std::numbers::e * std::exp(uniform(gen, 0.0, 8.0)) / a;
    const double t = log_dominance_threshold(a, b);
    const double at_threshold = a * std::log(b * t) - t;
    const double at_ten = a * std::log(b * 10.0 * t) - 10.0 * t;
    tally.record(std::max(at_threshold, at_ten) - 1e-12 * t);
  }
  return tally.finish("a ln(bt) - t at t = 2a ln(ab) and at 10x");
}

CheckResult check_gamma_quotient(const CheckConfig& cfg) {
  Tally tally("gamma_confidence_threshold", cfg.gamma_trials, 0, cfg.invert);
  std::size_t resampled = 0;
  for (std::size_t trial = 0; trial < cfg.gamma_trials; ++trial) {
    rng::Engine gen = trial_stream(cfg, Suite::gamma, trial);
    // Draw until the lemma's side conditions hold: δ ≤ uγ²λ_xλ/128 and
    // λ ≤ d ln(1+T/(λd)) + 2 ln(4u/δ).
    for (;;) {
      const double d = static_cast<double>(uniform_int(gen, 1, 20));
      const double gamma = uniform(gen, 0.2, 2.0);
      const double lambda_x = std::exp(uniform(gen, std::log(0.01), 0.0));
      const double u = static_cast<double>(uniform_int(gen, 2, 1000));
      const double delta = std::exp(uniform(gen, std::log(1e-4), std::log(0.5)));
      const double lambda = uniform(gen, 0.5, 8.0);
      const double t = gamma_confidence_threshold(d, gamma, lambda_x, u, delta);
      const bool hypotheses =
          delta <= u * gamma * gamma * lambda_x * lambda / 128.0 &&
          lambda <= d * std::log1p(t / (lambda * d)) + 2.0 * std::log(4.0 * u / delta);
      if (!hypotheses) {
        ++resampled;
        continue;
      }
      const double q = gamma_confidence_quotient(t, d, lambda, lambda_x, u, delta);
      tally.record(q - gamma / 2.0);
      break;
    }
  }
  return tally.finish("quotient - gamma/2 at the threshold; " + std::to_string(resampled) +
                      " draws resampled for side conditions");
}

CheckResult check_confidence_ellipsoid(const CheckConfig& cfg) {
  const auto dim = static_cast<Index>(cfg.ellipsoid_dim);
  const double d = static_cast<double>(cfg.ellipsoid_dim);
  const double lambda = cfg.ellipsoid_lambda;
  Tally tally("confidence_ellipsoid", cfg.ellipsoid_trials, budget(cfg.delta, cfg.ellipsoid_trials),
              cfg.invert);
  std::vector<double> width(cfg.ellipsoid_rounds + 1);
  for (std::size_t t = 0; t <= cfg.ellipsoid_rounds; ++t) {
    width[t] = beta_linear(static_cast<double>(t), cfg.delta, d, lambda);
  }
  for (std::size_t trial = 0; trial < cfg.ellipsoid_trials; ++trial) {
    rng::Engine gen = trial_stream(cfg, Suite::ellipsoid, trial);
    const Vector theta = nonnegative_unit(gen, dim) * std::sqrt(rng::uniform01(gen));
    SymMatrix m = SymMatrix::identity(dim, lambda);
    Vector b = Vector::Zero(dim);
    double worst = std::sqrt(lambda) * theta.norm() - width[0];
    for (std::size_t t = 1; t <= cfg.ellipsoid_rounds; ++t) {
      const Vector x = nonnegative_unit(gen, dim);
      const double y = rng::bernoulli(gen, theta.dot(x)) ? 1.0 : 0.0;
      m.add_outer(x);
      b += y * x;
      const Vector err = cholesky(m).solve(b) - theta;
      const double norm = std::sqrt(err.dot(m.dense() * err));
      worst = std::max(worst, norm - width[t]);
    }
    tally.record(worst);
  }
  return tally.finish("any-t failure of ||theta_hat - theta||_M <= beta_linear(t, delta)");
}

std::vector<CheckResult> run_all_checks(const CheckConfig& cfg) {
  using Check = CheckResult (*)(const CheckConfig&);
  const std::pair<std::size_t, Check> suites[] = {
      {cfg.det_trials, check_det_bound},
      {cfg.self_norm_trials, check_self_norm_sum},
      {cfg.lambda_min_trials, check_lambda_min},
      {cfg.bernstein_trials, check_bernstein},
      {cfg.log_dominance_trials, check_log_dominance},
      {cfg.gamma_trials, check_gamma_quotient},
      {cfg.ellipsoid_trials, check_confidence_ellipsoid},
  };
  std::vector<CheckResult> results;
  for (const auto& [trials, check] : suites) {
    if (trials > 0) results.push_back(check(cfg));
  }
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed(); });
}

void write_table(std::ostream& out, const std::vector<CheckResult>& results) {
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %8s %10s %8s %14s  %s\n", "check", "trials",
                "violations", "allowed", "worst_margin", "verdict");
  out << line;
  for (const CheckResult& r : results) {
    std::snprintf(line, sizeof line, "%-28s %8zu %10zu %8zu %14.6g  %s\n", r.name.c_str(),
                  r.trials, r.violations, r.allowed, r.worst_margin, r.passed() ? "pass" : "FAIL");
    out << line;
  }
  out << "overall: " << (all_passed(results) ? "pass" : "FAIL") << '\n';
}

}  // namespace clubcascade::bounds
