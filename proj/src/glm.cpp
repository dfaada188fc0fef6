#include "clubcascade/glm.hpp"

#include "clubcascade/bounds.hpp"
#include "clubcascade/error.hpp"

#include <cmath>
#include <string>

namespace clubcascade {

double link_mean(Link link, double z) {
  switch (link) {
    case Link::logistic:
      // Split on sign so exp never overflows.
      if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
      return std::exp(z) / (1.0 + std::exp(z));
    case Link::identity: return z;
  }
  return z;
}

double link_slope(Link link, double z) {
  switch (link) {
    case Link::logistic: {
      const double p = link_mean(link, z);
      return p * (1.0 - p);
    }
    case Link::identity: return 1.0;
  }
  return 1.0;
}

LinkConstants glm_link_constants(Link link) {
  switch (link) {
    case Link::logistic: {
      const double e2 = std::exp(2.0);
      return {e2 / ((1.0 + e2) * (1.0 + e2)), 0.25};
    }
    case Link::identity: return {1.0, 1.0};
  }
  return {1.0, 1.0};
}

Vector glm_score(GlmSampleBlocks blocks, Link link, double reg, const Vector& theta) {
  Vector g = -reg * theta;
  for (auto block : blocks) {
    for (const GlmSample& s : block) {
      if (s.x.size() != theta.size()) throw Error(Errc::dimension_mismatch, "glm sample dimension");
      g += (s.y - link_mean(link, s.x.dot(theta))) * s.x;
    }
  }
  return g;
}

double glm_loss(GlmSampleBlocks blocks, Link link, double reg, const Vector& theta) {
  double loss = 0.5 * reg * theta.squaredNorm();
  for (auto block : blocks) {
    for (const GlmSample& s : block) {
      const double z = s.x.dot(theta);
      switch (link) {
        case Link::logistic:
          // log(1 + e^z) without overflow.
          loss += (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - s.y * z;
          break;
        case Link::identity: loss += 0.5 * (s.y - z) * (s.y - z); break;
      }
    }
  }
  return loss;
}

Matrix glm_jacobian(GlmSampleBlocks blocks, Link link, double reg, const Vector& theta) {
  const Index dim = theta.size();
  Matrix j = Matrix::Zero(dim, dim);
  for (auto block : blocks) {
    for (const GlmSample& s : block) {
      j.selfadjointView<Eigen::Lower>().rankUpdate(s.x, -link_slope(link, s.x.dot(theta)));
    }
  }
  j.triangularView<Eigen::StrictlyUpper>() = j.transpose();
  j.diagonal().array() -= reg;
  return j;
}

Vector glm_mle(GlmSampleBlocks blocks, Link link, double reg, Index dim,
               const std::optional<Vector>& warm_start) {
  if (!(reg > 0.0)) throw Error(Errc::invalid_config, "glm_mle needs a positive regularizer");
  Vector theta = warm_start ? *warm_start : Vector::Zero(dim);
  if (theta.size() != dim) throw Error(Errc::dimension_mismatch, "glm warm start dimension");
  Vector g = glm_score(blocks, link, reg, theta);
  double loss = glm_loss(blocks, link, reg, theta);
  for (int iter = 0; iter < kGlmMaxNewtonIterations; ++iter) {
    if (g.norm() <= kGlmScoreTolerance) return theta;
    const Matrix hessian = -glm_jacobian(blocks, link, reg, theta);
    const Vector direction = hessian.ldlt().solve(g);
    // The loss is strictly convex, so halving until an Armijo decrease keeps
    // Newton globally convergent on separable data. Near the optimum the loss
    // change drops below rounding; a step that shrinks the score without
    // raising the loss is accepted there.
    const double slope = g.dot(direction);
    const double g_norm = g.norm();
    double step = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      Vector candidate = theta + step * direction;
      const double candidate_loss = glm_loss(blocks, link, reg, candidate);
      Vector candidate_g = glm_score(blocks, link, reg, candidate);
      const bool armijo = candidate_loss <= loss - 1e-4 * step * slope;
      const bool polish = candidate_g.norm() < g_norm &&
                          candidate_loss <= loss + 1e-12 * (1.0 + std::abs(loss));
      if (armijo || polish) {
        theta = std::move(candidate);
        g = std::move(candidate_g);
        loss = candidate_loss;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  // Stalled or out of iterations: the contract only needs a 1e-8 residual.
  const double norm = g.norm();
  if (norm <= 1e-8) return theta;
  throw Error(Errc::no_convergence,
              "glm_mle: score norm " + std::to_string(norm) + " after " +
                  std::to_string(kGlmMaxNewtonIterations) + " Newton iterations");
}

Vector glm_mle(std::span<const GlmSample> samples, Link link, double reg, Index dim,
               const std::optional<Vector>& warm_start) {
  const std::span<const GlmSample> one[] = {samples};
  return glm_mle(GlmSampleBlocks(one), link, reg, dim, warm_start);
}

void GlmConfig::validate() const {
  base.validate();
  if (!(mle_reg > 0.0)) throw Error(Errc::invalid_config, "mle_reg must be positive");
  if (!(lambda_x > 0.0 && lambda_x <= 1.0)) {
    throw Error(Errc::invalid_config, "lambda_x must lie in (0, 1]");
  }
  if (alpha && !(*alpha >= 0.0)) throw Error(Errc::invalid_config, "alpha must be nonnegative");
}

GlmClubLearner::GlmClubLearner(GlmConfig cfg, std::size_t users)
    : cfg_(std::move(cfg)),
      constants_(glm_link_constants(cfg_.link)),
      samples_(users),
      gram_(users, SymMatrix(static_cast<Index>(cfg_.base.d))),
      theta_(users, Vector::Zero(static_cast<Index>(cfg_.base.d))),
      graph_(cfg_.base.init.build(users)) {
  cfg_.validate();
  const double d = static_cast<double>(cfg_.base.d);
  const double horizon = static_cast<double>(cfg_.base.horizon);
  const double m = static_cast<double>(cfg_.base.m_guess);
  alpha_ = cfg_.alpha ? *cfg_.alpha : bounds::alpha_default_glm(d, cfg_.lambda_x, constants_.c_mu);
  beta_ = cfg_.base.beta ? *cfg_.base.beta
                         : bounds::beta_glm(horizon, 1.0 / (4.0 * m * horizon), d, cfg_.lambda_x,
                                            constants_.c_mu);
}

SymMatrix GlmClubLearner::component_design(std::size_t user) const {
  const auto dim = static_cast<Index>(cfg_.base.d);
  SymMatrix m = SymMatrix::identity(dim, cfg_.base.lambda);
  for (std::size_t member : graph_.component_members(user)) m += gram_[member];
  return m;
}

Vector GlmClubLearner::component_theta(std::size_t user) const {
  const auto& members = graph_.component_members(user);
  if (members.size() == 1) return theta_[user];
  std::vector<std::span<const GlmSample>> blocks;
  blocks.reserve(members.size());
  for (std::size_t member : members) blocks.emplace_back(samples_[member]);
  return glm_mle(GlmSampleBlocks(blocks), cfg_.link, cfg_.mle_reg,
                 static_cast<Index>(cfg_.base.d), theta_[user]);
}

std::vector<double> GlmClubLearner::scores(std::size_t user,
                                           std::span<const ItemFeature> pool) const {
  const Vector theta = component_theta(user);
  const CholeskyFactor chol = cholesky(component_design(user));
  const double bonus = constants_.kappa_mu * beta_;
  std::vector<double> out(pool.size());
  if (pool.empty()) return out;
  Matrix xs(theta.size(), static_cast<Index>(pool.size()));
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (pool[j].x.size() != theta.size()) {
      throw Error(Errc::dimension_mismatch, "item feature dimension");
    }
    xs.col(static_cast<Index>(j)) = pool[j].x;
  }
  const Vector widths = quad_form_inv_columns(chol, xs);
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const auto i = static_cast<Index>(j);
    out[j] = std::min(link_mean(cfg_.link, xs.col(i).dot(theta)) + bonus * std::sqrt(widths[i]),
                      1.0);
  }
  return out;
}

ItemList GlmClubLearner::recommend(std::size_t user, std::span<const ItemFeature> pool) const {
  if (pool.size() < cfg_.base.K) {
    throw Error(Errc::pool_too_small, "pool of " + std::to_string(pool.size()) +
                                          " items cannot fill a list of " +
                                          std::to_string(cfg_.base.K));
  }
  const std::vector<double> s = scores(user, pool);
  ItemList list;
  list.reserve(cfg_.base.K);
  for (std::size_t idx : select_top_k(pool, s, cfg_.base.K)) list.push_back(pool[idx]);
  require_distinct_ids(list);
  return list;
}

void GlmClubLearner::update(std::size_t user, std::span<const ItemFeature> list,
                            const CascadeOutcome& outcome) {
  if (outcome.list_length() != list.size()) {
    throw Error(Errc::inconsistent_outcome,
                "outcome for a list of " + std::to_string(outcome.list_length()) +
                    " items applied to a list of " + std::to_string(list.size()));
  }
  auto& store = samples_.at(user);
  for (std::size_t k = 0; k < outcome.examined(); ++k) {
    const bool clicked = outcome.clicked() && k + 1 == outcome.position();
    store.push_back({list[k].x, clicked ? 1.0 : 0.0});
    gram_[user].add_outer(list[k].x);
  }
  theta_[user] = glm_mle(std::span<const GlmSample>(store), cfg_.link, cfg_.mle_reg,
                         static_cast<Index>(cfg_.base.d), theta_[user]);
}

std::size_t GlmClubLearner::prune_edges(std::size_t user) {
  const std::vector<std::size_t> neighbors = graph_.neighbors(user);
  const auto t_user = static_cast<double>(samples_[user].size());
  std::size_t removed = 0;
  for (std::size_t other : neighbors) {
    const double threshold =
        deletion_threshold(t_user, static_cast<double>(samples_[other].size()), alpha_);
    if ((theta_[user] - theta_[other]).norm() >= threshold) {
      graph_.remove_edge(user, other);
      ++removed;
    }
  }
  return removed;
}

StepResult GlmClubLearner::step(std::size_t user, std::span<const ItemFeature> pool,
                                const FeedbackFn& feedback) {
  ItemList list = recommend(user, pool);
  CascadeOutcome outcome = feedback(list);
  update(user, list, outcome);
  prune_edges(user);
  return {std::move(list), std::move(outcome)};
}

}  // namespace clubcascade
