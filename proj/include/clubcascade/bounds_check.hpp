#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Empirical checks that the closed-form bounds hold on simulated data.
namespace clubcascade::bounds {

struct CheckResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t allowed = 0;
  // Worst observed value of (empirical − bound); ≤ 0 means the bound held in every trial.
  double worst_margin = 0.0;
  std::string detail;

  bool passed() const noexcept { return violations <= allowed; }
};

struct CheckConfig {
  std::uint64_t seed = 1;

  std::size_t det_trials = 500;
  std::size_t self_norm_trials = 500;
  std::size_t lambda_min_trials = 200;
  std::size_t lambda_min_rounds = 10000;
  std::size_t lambda_min_dim = 5;
  std::size_t bernstein_trials = 1000;
  std::size_t log_dominance_trials = 1000;
  std::size_t gamma_trials = 1000;
  std::size_t ellipsoid_trials = 200;
  std::size_t ellipsoid_rounds = 5000;
  std::size_t ellipsoid_dim = 5;
  double ellipsoid_lambda = 1.0;
  double delta = 0.1;

  // Negative control: every bound is replaced by a value the empirical
  // quantity cannot satisfy, so each non-empty suite must fail.
  bool invert = false;
};

CheckResult check_det_bound(const CheckConfig& cfg);
CheckResult check_self_norm_sum(const CheckConfig& cfg);
CheckResult check_lambda_min(const CheckConfig& cfg);
CheckResult check_bernstein(const CheckConfig& cfg);
CheckResult check_log_dominance(const CheckConfig& cfg);
CheckResult check_gamma_quotient(const CheckConfig& cfg);
CheckResult check_confidence_ellipsoid(const CheckConfig& cfg);

/// Every suite with a nonzero trial count, in a fixed order.
std::vector<CheckResult> run_all_checks(const CheckConfig& cfg);

bool all_passed(const std::vector<CheckResult>& results);

/// Fixed-width table with one row per suite and an overall verdict line.
void write_table(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace clubcascade::bounds
