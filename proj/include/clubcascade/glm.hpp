#pragma once

#include "clubcascade/club.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace clubcascade {

enum class Link { logistic, identity };

double link_mean(Link link, double z);
double link_slope(Link link, double z);

struct LinkConstants {
  double c_mu;      // inf of μ' on [-2, 2]
  double kappa_mu;  // Lipschitz constant of μ
};
LinkConstants glm_link_constants(Link link);

struct GlmSample {
  Vector x;
  double y = 0.0;
};

using GlmSampleBlocks = std::span<const std::span<const GlmSample>>;

inline constexpr double kGlmDefaultReg = 1e-6;
inline constexpr int kGlmMaxNewtonIterations = 100;
inline constexpr double kGlmScoreTolerance = 1e-10;

/// Σ (y − μ(θᵀx)) x − reg·θ over every sample in every block.
Vector glm_score(GlmSampleBlocks blocks, Link link, double reg, const Vector& theta);

/// Penalized negative log-likelihood; its gradient is −glm_score.
double glm_loss(GlmSampleBlocks blocks, Link link, double reg, const Vector& theta);

/// Derivative of glm_score: −Σ μ'(θᵀx) x xᵀ − reg·I.
Matrix glm_jacobian(GlmSampleBlocks blocks, Link link, double reg, const Vector& theta);

/// Root of glm_score by Newton's method, halving steps until the loss decreases.
/// Throws NoConvergence after kGlmMaxNewtonIterations iterations.
Vector glm_mle(GlmSampleBlocks blocks, Link link, double reg, Index dim,
               const std::optional<Vector>& warm_start = std::nullopt);
Vector glm_mle(std::span<const GlmSample> samples, Link link, double reg, Index dim,
               const std::optional<Vector>& warm_start = std::nullopt);

struct GlmConfig {
  ClubConfig base;             // base.alpha is ignored; see alpha below
  Link link = Link::logistic;
  double mle_reg = kGlmDefaultReg;
  double lambda_x = 0.025;
  std::optional<double> alpha;  // empty: √(32d/(λ_x c_μ²))

  void validate() const;
};

class GlmClubLearner final : public Learner {
 public:
  GlmClubLearner(GlmConfig cfg, std::size_t users);

  const GlmConfig& config() const noexcept { return cfg_; }
  std::size_t users() const noexcept { return samples_.size(); }
  const UserGraph& graph() const override { return graph_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  const std::vector<GlmSample>& samples(std::size_t user) const { return samples_.at(user); }
  const Vector& theta_hat(std::size_t user) const { return theta_.at(user); }
  std::size_t feedback_count(std::size_t user) const { return samples_.at(user).size(); }

  // λI + Σ examined x xᵀ over the user's component, and the component MLE.
  SymMatrix component_design(std::size_t user) const;
  Vector component_theta(std::size_t user) const;

  std::vector<double> scores(std::size_t user, std::span<const ItemFeature> pool) const;
  ItemList recommend(std::size_t user, std::span<const ItemFeature> pool) const;
  void update(std::size_t user, std::span<const ItemFeature> list, const CascadeOutcome& outcome);
  std::size_t prune_edges(std::size_t user);

  StepResult step(std::size_t user, std::span<const ItemFeature> pool,
                  const FeedbackFn& feedback) override;

 private:
  GlmConfig cfg_;
  LinkConstants constants_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::vector<std::vector<GlmSample>> samples_;
  std::vector<SymMatrix> gram_;
  std::vector<Vector> theta_;
  UserGraph graph_;
};

}  // namespace clubcascade
