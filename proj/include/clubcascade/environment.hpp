#pragma once

#include "clubcascade/linalg.hpp"
#include "clubcascade/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace clubcascade {

struct ItemFeature {
  std::size_t id = 0;
  Vector x;
};

using ItemList = std::vector<ItemFeature>;

/// Cascade feedback for one recommended list: either the 1-based position of
/// the first click or no click at all, plus the examined prefix of outcomes.
class CascadeOutcome {
 public:
  enum class Kind { click, no_click };

  static CascadeOutcome click_at(std::size_t position, std::size_t list_length);
  static CascadeOutcome no_click(std::size_t list_length);

  Kind kind() const noexcept { return kind_; }
  bool clicked() const noexcept { return kind_ == Kind::click; }
  // 1-based; only meaningful when clicked().
  std::size_t position() const noexcept { return position_; }
  std::size_t list_length() const noexcept { return list_length_; }
  // K_t = min(C_t, K).
  std::size_t examined() const noexcept { return observed_.size(); }
  const std::vector<std::uint8_t>& observed() const noexcept { return observed_; }

  bool operator==(const CascadeOutcome&) const = default;

 private:
  CascadeOutcome(Kind kind, std::size_t position, std::size_t list_length);
  Kind kind_;
  std::size_t position_;
  std::size_t list_length_;
  std::vector<std::uint8_t> observed_;
};

struct ThetaMode {
  enum class Kind { orthogonal, gap };
  Kind kind = Kind::orthogonal;
  double gamma = 0.0;  // minimum pairwise distance for Kind::gap

  static ThetaMode orthogonal() { return {Kind::orthogonal, 0.0}; }
  static ThetaMode gap(double gamma) { return {Kind::gap, gamma}; }
};

struct ClusterModel {
  std::size_t users = 0;
  std::vector<Vector> theta;            // one unit vector per cluster
  std::vector<std::size_t> assignment;  // user -> cluster
  double gamma = 0.0;                   // realized min pairwise distance (2 when m = 1)

  std::size_t clusters() const noexcept { return theta.size(); }
  const Vector& theta_of_user(std::size_t user) const { return theta[assignment[user]]; }
};

struct ItemPool {
  ItemList items;
  double lambda_x_hat = 0.0;  // λ_min of (1/L) Σ x xᵀ
};

ClusterModel gen_clusters(std::size_t users, std::size_t clusters, std::size_t dim, ThetaMode mode,
                          std::uint64_t seed);

/// Items x = ½(e_j + g/‖g‖) with j uniform and g standard Gaussian, so
/// ‖x‖ ≤ 1 and E[x xᵀ] = I/(2d).
ItemPool gen_item_pool(std::size_t count, std::size_t dim, std::uint64_t seed);

/// λ_min of the second-moment matrix of the construction above.
inline double item_pool_lambda_x(std::size_t dim) { return 0.5 / static_cast<double>(dim); }

/// clamp(θᵀx, 0, 1)
double click_probability(const Vector& theta, const ItemFeature& item);

CascadeOutcome cascade_feedback(std::span<const ItemFeature> list, const Vector& theta,
                                rng::Engine& gen);

/// 1 − Π_k (1 − p_k); the product is taken over sorted probabilities so that
/// permutations of the same list give bit-identical values.
double expected_reward(std::span<const ItemFeature> list, const Vector& theta);
double expected_reward_of_probabilities(std::vector<double> probabilities);

ItemList optimal_list(std::span<const ItemFeature> pool, const Vector& theta, std::size_t k);

double instant_regret(std::span<const ItemFeature> chosen, std::span<const ItemFeature> pool,
                      const Vector& theta);

/// |direct product difference − telescoped sum| for the cascade reward gap.
double regret_decomposition_check(std::span<const double> p_opt, std::span<const double> p_alg);
double regret_decomposition_check(std::span<const ItemFeature> list_opt,
                                  std::span<const ItemFeature> list_alg, const Vector& theta);

void require_distinct_ids(std::span<const ItemFeature> list);

/// Indices of the k largest scores, descending; equal scores go to the smaller item id.
std::vector<std::size_t> select_top_k(std::span<const ItemFeature> items,
                                      const std::vector<double>& scores, std::size_t k);

}  // namespace clubcascade
