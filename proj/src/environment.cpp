#include "clubcascade/environment.hpp"

#include "clubcascade/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

namespace clubcascade {

namespace {

constexpr int kGapAttempts = 1000;

Vector random_unit(std::size_t dim, rng::Engine& gen) {
  Vector v(static_cast<Index>(dim));
  do {
    for (Index i = 0; i < v.size(); ++i) v[i] = rng::normal(gen);
  } while (v.norm() == 0.0);
  return v.normalized();
}

double min_pairwise_distance(const std::vector<Vector>& theta) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < theta.size(); ++a) {
    for (std::size_t b = a + 1; b < theta.size(); ++b) {
      best = std::min(best, (theta[a] - theta[b]).norm());
    }
  }
  return best;
}

// Columns 1..count of a random orthonormal basis whose first column is v.
Matrix orthonormal_complement(const Vector& v, std::size_t count, rng::Engine& gen) {
  const Index d = v.size();
  Matrix z(d, static_cast<Index>(count) + 1);
  z.col(0) = v;
  for (Index j = 1; j < z.cols(); ++j) {
    for (Index i = 0; i < d; ++i) z(i, j) = rng::normal(gen);
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(d, z.cols());
  return q.rightCols(static_cast<Index>(count));
}

}  // namespace

CascadeOutcome::CascadeOutcome(Kind kind, std::size_t position, std::size_t list_length)
    : kind_(kind), position_(position), list_length_(list_length) {
  if (kind == Kind::click) {
    observed_.assign(position, 0);
    observed_.back() = 1;
  } else {
    observed_.assign(list_length, 0);
  }
}

CascadeOutcome CascadeOutcome::click_at(std::size_t position, std::size_t list_length) {
  if (position < 1 || position > list_length) {
    throw Error(Errc::inconsistent_outcome, "click position " + std::to_string(position) +
                                                " outside list of length " +
                                                std::to_string(list_length));
  }
  return CascadeOutcome(Kind::click, position, list_length);
}

CascadeOutcome CascadeOutcome::no_click(std::size_t list_length) {
  if (list_length < 1) throw Error(Errc::inconsistent_outcome, "empty list");
  return CascadeOutcome(Kind::no_click, 0, list_length);
}

ClusterModel gen_clusters(std::size_t users, std::size_t clusters, std::size_t dim, ThetaMode mode,
                          std::uint64_t seed) {
  if (clusters < 1 || dim < 1 || clusters > users) {
    throw Error(Errc::infeasible_mode, "need 1 <= m <= u and d >= 1");
  }
  rng::Engine gen = rng::stream(seed, rng::Purpose::clusters);
  ClusterModel model;
  model.users = users;

  if (clusters == 1) {
    model.theta.push_back(random_unit(dim, gen));
    model.gamma = 2.0;
  } else if (mode.kind == ThetaMode::Kind::orthogonal) {
    if (clusters > dim) {
      throw Error(Errc::infeasible_mode, "orthogonal mode needs m <= d");
    }
    Matrix z(static_cast<Index>(dim), static_cast<Index>(clusters));
    for (Index j = 0; j < z.cols(); ++j) {
      for (Index i = 0; i < z.rows(); ++i) z(i, j) = rng::normal(gen);
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    const Matrix q = qr.householderQ() * Matrix::Identity(z.rows(), z.cols());
    for (Index j = 0; j < q.cols(); ++j) model.theta.emplace_back(q.col(j));
    model.gamma = min_pairwise_distance(model.theta);
  } else {
    const double gamma = mode.gamma;
    if (!(gamma > 0.0) || gamma > 2.0) {
      throw Error(Errc::infeasible_mode, "gap mode needs 0 < gamma <= 2");
    }
    // Perturb a random base direction along mutually orthogonal directions
    // so that every pair sits at distance γ(1 + 0.2U); fall back to plain
    // rejection sampling when that geometry is unavailable.
    const bool perturb = gamma < std::sqrt(2.0) && clusters + 1 <= dim;
    bool accepted = false;
    for (int attempt = 0; attempt < kGapAttempts && !accepted; ++attempt) {
      std::vector<Vector> theta;
      if (perturb) {
        const Vector base = random_unit(dim, gen);
        const Matrix dirs = orthonormal_complement(base, clusters, gen);
        const double s0 = gamma / std::sqrt(2.0 - gamma * gamma);
        const double s = s0 * (1.0 + 0.2 * rng::uniform01(gen));
        for (Index j = 0; j < dirs.cols(); ++j) {
          theta.push_back((base + s * dirs.col(j)).normalized());
        }
      } else {
        for (std::size_t j = 0; j < clusters; ++j) theta.push_back(random_unit(dim, gen));
      }
      const double realized = min_pairwise_distance(theta);
      if (realized >= gamma) {
        model.theta = std::move(theta);
        model.gamma = realized;
        accepted = true;
      }
    }
    if (!accepted) {
      throw Error(Errc::infeasible_mode, "could not place " + std::to_string(clusters) +
                                             " unit vectors with gap " + std::to_string(gamma));
    }
  }

  std::vector<std::size_t> order(users);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng::uniform_index(gen, i)]);
  }
  model.assignment.assign(users, 0);
  for (std::size_t r = 0; r < users; ++r) {
    model.assignment[order[r]] = r < clusters ? r : rng::uniform_index(gen, clusters);
  }
  return model;
}

ItemPool gen_item_pool(std::size_t count, std::size_t dim, std::uint64_t seed) {
  if (count < 1 || dim < 1) throw Error(Errc::degenerate_pool, "empty pool");
  rng::Engine gen = rng::stream(seed, rng::Purpose::items);
  ItemPool pool;
  pool.items.reserve(count);
  SymMatrix second_moment(static_cast<Index>(dim));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t axis = rng::uniform_index(gen, dim);
    Vector x = random_unit(dim, gen);
    x[static_cast<Index>(axis)] += 1.0;
    x *= 0.5;
    second_moment.add_outer(x, 1.0 / static_cast<double>(count));
    pool.items.push_back({i, std::move(x)});
  }
  if (count < dim) {
    throw Error(Errc::degenerate_pool, "fewer items than dimensions");
  }
  pool.lambda_x_hat = min_eigenvalue(second_moment, 1e-12);
  if (!(pool.lambda_x_hat > 1e-6)) {
    throw Error(Errc::degenerate_pool,
                "empirical lambda_x = " + std::to_string(pool.lambda_x_hat));
  }
  return pool;
}

double click_probability(const Vector& theta, const ItemFeature& item) {
  if (theta.size() != item.x.size()) {
    throw Error(Errc::dimension_mismatch, "click_probability");
  }
  return std::clamp(theta.dot(item.x), 0.0, 1.0);
}

std::vector<std::size_t> select_top_k(std::span<const ItemFeature> items,
                                      const std::vector<double>& scores, std::size_t k) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return items[a].id < items[b].id;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  order.resize(k);
  return order;
}

void require_distinct_ids(std::span<const ItemFeature> list) {
  std::unordered_set<std::size_t> seen;
  for (const ItemFeature& item : list) {
    if (!seen.insert(item.id).second) {
      throw Error(Errc::duplicate_items, "item " + std::to_string(item.id) + " repeated");
    }
  }
}

CascadeOutcome cascade_feedback(std::span<const ItemFeature> list, const Vector& theta,
                                rng::Engine& gen) {
  if (list.empty()) throw Error(Errc::inconsistent_outcome, "empty list");
  require_distinct_ids(list);
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (rng::bernoulli(gen, click_probability(theta, list[k]))) {
      return CascadeOutcome::click_at(k + 1, list.size());
    }
  }
  return CascadeOutcome::no_click(list.size());
}

double expected_reward_of_probabilities(std::vector<double> probabilities) {
  std::sort(probabilities.begin(), probabilities.end());
  double miss = 1.0;
  for (double p : probabilities) miss *= 1.0 - p;
  return 1.0 - miss;
}

double expected_reward(std::span<const ItemFeature> list, const Vector& theta) {
  std::vector<double> p;
  p.reserve(list.size());
  for (const ItemFeature& item : list) p.push_back(click_probability(theta, item));
  return expected_reward_of_probabilities(std::move(p));
}

ItemList optimal_list(std::span<const ItemFeature> pool, const Vector& theta, std::size_t k) {
  if (k < 1 || pool.size() < k) {
    throw Error(Errc::pool_too_small, "pool of " + std::to_string(pool.size()) +
                                          " items cannot fill a list of " + std::to_string(k));
  }
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const ItemFeature& item : pool) scores.push_back(theta.dot(item.x));
  ItemList out;
  for (std::size_t idx : select_top_k(pool, scores, k)) out.push_back(pool[idx]);
  return out;
}

double instant_regret(std::span<const ItemFeature> chosen, std::span<const ItemFeature> pool,
                      const Vector& theta) {
  const ItemList best = optimal_list(pool, theta, chosen.size());
  return std::max(0.0, expected_reward(best, theta) - expected_reward(chosen, theta));
}

double regret_decomposition_check(std::span<const double> p_opt, std::span<const double> p_alg) {
  if (p_opt.size() != p_alg.size()) {
    throw Error(Errc::dimension_mismatch, "regret_decomposition_check list lengths differ");
  }
  const std::size_t k = p_opt.size();
  double miss_alg = 1.0;
  double miss_opt = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    miss_alg *= 1.0 - p_alg[i];
    miss_opt *= 1.0 - p_opt[i];
  }
  const double direct = miss_alg - miss_opt;

  // suffix[i] = Π_{ℓ >= i} (1 − p_opt,ℓ)
  std::vector<double> suffix(k + 1, 1.0);
  for (std::size_t i = k; i-- > 0;) suffix[i] = suffix[i + 1] * (1.0 - p_opt[i]);
  double telescoped = 0.0;
  double prefix = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    telescoped += prefix * (p_opt[i] - p_alg[i]) * suffix[i + 1];
    prefix *= 1.0 - p_alg[i];
  }
  return std::abs(direct - telescoped);
}

double regret_decomposition_check(std::span<const ItemFeature> list_opt,
                                  std::span<const ItemFeature> list_alg, const Vector& theta) {
  std::vector<double> p_opt;
  std::vector<double> p_alg;
  for (const ItemFeature& item : list_opt) p_opt.push_back(click_probability(theta, item));
  for (const ItemFeature& item : list_alg) p_alg.push_back(click_probability(theta, item));
  return regret_decomposition_check(p_opt, p_alg);
}

}  // namespace clubcascade
