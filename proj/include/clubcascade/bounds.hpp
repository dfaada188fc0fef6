#pragma once

#include <cstddef>

// Closed-form confidence widths, thresholds and regret bounds. All logarithms
// are natural.
namespace clubcascade::bounds {

struct BoundsConfig {
  double d = 20;
  double lambda = 4.0;
  double delta = 0.1;
  double gamma = 1.4142135623730951;
  double lambda_x = 0.025;
  double K = 4;
  double L_norm = 1.0;
  double u = 40;
  double m = 5;
  double T = 20000;
  double c_mu = 1.0;
  double kappa_mu = 1.0;

  void validate() const;
};

/// √(d ln(1 + t/(λd)) + 2 ln(1/δ)) + √λ
double beta_linear(double t, double delta, double d, double lambda);

/// (1/c_μ) √(8/λ_x + d ln(T/d) + 2 ln(1/δ)), with ln(T/d) clamped at 0 for T < d.
double beta_glm(double T, double delta, double d, double lambda_x, double c_mu);

/// √(32d/λ_x)
double alpha_default(double d, double lambda_x);
/// √(32d/(λ_x c_μ²))
double alpha_default_glm(double d, double lambda_x, double c_mu);

/// ((trace M₀ + Σ‖x‖²)/d)^d
double det_upper_bound(double trace_m0, double sum_sq_norms, double d);
/// (λ + nL²/d)^d
double det_upper_bound_ridge(double lambda, double n, double L, double d);

/// √(2dnK ln(1 + nKL²/(λd))); warns when λ < K L².
double self_norm_sum_bound(double n, double K, double d, double lambda, double L);

/// (tλ_x − (L²/3)√(18tA + A²) − (L²/3)A)₊ with A = ln((tL⁴+1)(tL⁴+3)d/δ).
double lambda_min_lower(double t, double lambda_x, double L, double delta, double d);

/// Rounds after which λ_min(S_t) ≥ tλ_x/2: 256/λ_x² · ln(128d/(λ_x²δ)).
/// Requires δ ≤ 1/8.
double lambda_min_threshold(double lambda_x, double d, double delta);

/// Rounds after which λ_min(S_t) ≥ tλ_x/8 as used by the cluster-exploration
/// argument: 1024/λ_x² · ln(512d/(λ_x²δ)).
double lambda_min_eighth_rate_threshold(double lambda_x, double d, double delta);

/// 16/p · ln(n/δ) + 4B/p
double bernstein_rounds(double p, double B, double n, double delta);

/// 2a ln(ab); throws HypothesisViolated when ab < e.
double log_dominance_threshold(double a, double b);

/// 16u ln(4uT/δ) + 4u · max{512d/(γ²λ_x) ln(4u/δ), 256/λ_x² ln(128d/(λ_x²δ))}
double t0_exploration(double u, double d, double gamma, double lambda_x, double delta, double T);

/// 512d/(γ²λ_x) · ln(4u/δ)
double gamma_confidence_threshold(double d, double gamma, double lambda_x, double u, double delta);

/// (√(d ln(1+T/(λd)) + 2 ln(4u/δ)) + √λ) / √(λ + Tλ_x/8); at most γ/2 past the threshold above.
double gamma_confidence_quotient(double T, double d, double lambda, double lambda_x, double u,
                                 double delta);

/// 2(√(d ln(1+T/(λd)) + 2 ln(4mT)) + √λ) · √(2dmKT ln(1+TK/(λd)))
double regret_main_term(const BoundsConfig& cfg);

/// Main term plus the exploration term T₀(δ); the exploration term is
/// dropped for a single cluster.
double regret_upper_bound(const BoundsConfig& cfg);

}  // namespace clubcascade::bounds
