#pragma once

#include "clubcascade/environment.hpp"
#include "clubcascade/linalg.hpp"
#include "clubcascade/user_graph.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace clubcascade {

struct GraphInit {
  enum class Kind { complete, erdos_renyi, empty };
  Kind kind = Kind::complete;
  double p = 1.0;
  std::uint64_t seed = 0;

  static GraphInit complete() { return {Kind::complete, 1.0, 0}; }
  static GraphInit erdos_renyi(double p, std::uint64_t seed) { return {Kind::erdos_renyi, p, seed}; }
  static GraphInit empty() { return {Kind::empty, 0.0, 0}; }

  UserGraph build(std::size_t users) const;
};

enum class BetaSchedule {
  fixed_horizon,  // one width from the configured horizon and cluster-count guess
  anytime,        // beta_linear(T_V, δ) from the current component's feedback count
};

inline constexpr double kNoDeletion = std::numeric_limits<double>::infinity();

struct ClubConfig {
  double lambda = 4.0;
  double alpha = 1.0;          // kNoDeletion disables edge deletion
  std::optional<double> beta;  // empty: computed from the horizon
  BetaSchedule beta_schedule = BetaSchedule::fixed_horizon;
  double delta = 0.1;
  std::size_t m_guess = 1;
  std::size_t K = 4;
  std::size_t d = 20;
  std::size_t horizon = 10000;
  GraphInit init = GraphInit::complete();

  void validate() const;
};

struct UserStats {
  explicit UserStats(Index dim)
      : S(dim), b(Vector::Zero(dim)), theta_hat(Vector::Zero(dim)) {}

  SymMatrix S;
  Vector b;
  std::size_t T = 0;
  Vector theta_hat;
};

struct ComponentAggregate {
  SymMatrix M;  // λI + Σ S_i
  Vector b;
  Vector theta_hat;
  std::size_t T = 0;
  std::vector<std::size_t> members;
};

using FeedbackFn = std::function<CascadeOutcome(std::span<const ItemFeature>)>;

struct StepResult {
  ItemList list;
  CascadeOutcome outcome;
};

/// α (√((1+ln(1+T_i))/(1+T_i)) + √((1+ln(1+T_ℓ))/(1+T_ℓ)))
double deletion_threshold(double T_i, double T_l, double alpha);

/// √(d ln(1 + T/(λd)) + 2 ln(4 m T)) + √λ
double auto_beta(const ClubConfig& cfg, std::size_t m_guess, double horizon);

/// min{θ̂ᵀx + β √(xᵀM⁻¹x), 1} for every item.
std::vector<double> ucb_scores(const Vector& theta_hat, const CholeskyFactor& m_chol, double beta,
                               std::span<const ItemFeature> pool);

/// Interface shared by the linear and generalized-linear learners.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual StepResult step(std::size_t user, std::span<const ItemFeature> pool,
                          const FeedbackFn& feedback) = 0;
  virtual const UserGraph& graph() const = 0;
};

class ClubLearner final : public Learner {
 public:
  ClubLearner(ClubConfig cfg, std::size_t users);

  const ClubConfig& config() const noexcept { return cfg_; }
  std::size_t users() const noexcept { return stats_.size(); }
  const UserStats& stats(std::size_t user) const { return stats_.at(user); }
  const UserGraph& graph() const override { return graph_; }

  ComponentAggregate component_aggregate(std::size_t user) const;
  double beta_for(const ComponentAggregate& aggregate) const;
  ItemList recommend(std::size_t user, std::span<const ItemFeature> pool) const;
  void update(std::size_t user, std::span<const ItemFeature> list, const CascadeOutcome& outcome);
  std::size_t prune_edges(std::size_t user) { return prune_edges(user, cfg_.alpha); }
  std::size_t prune_edges(std::size_t user, double alpha);

  StepResult step(std::size_t user, std::span<const ItemFeature> pool,
                  const FeedbackFn& feedback) override;

  // "club-state v1" text snapshot of per-user statistics and the edge list.
  void save_snapshot(std::ostream& out) const;
  static ClubLearner load_snapshot(std::istream& in, ClubConfig cfg);

 private:
  ClubConfig cfg_;
  std::vector<UserStats> stats_;
  UserGraph graph_;
  double fixed_beta_ = 0.0;
};

inline ClubLearner init_learner(const ClubConfig& cfg, std::size_t users) {
  return ClubLearner(cfg, users);
}

}  // namespace clubcascade
