#include "clubcascade/club.hpp"

#include "clubcascade/bounds.hpp"
#include "clubcascade/error.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace clubcascade {

namespace {

constexpr const char* kSnapshotHeader = "club-state v1";

double confidence_radius(double t) { return std::sqrt((1.0 + std::log1p(t)) / (1.0 + t)); }

Matrix columns_of(std::span<const ItemFeature> pool, Index dim) {
  Matrix xs(dim, static_cast<Index>(pool.size()));
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (pool[j].x.size() != dim) throw Error(Errc::dimension_mismatch, "item feature dimension");
    xs.col(static_cast<Index>(j)) = pool[j].x;
  }
  return xs;
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) throw Error(Errc::parse_error, std::string("snapshot: expected ") + what);
  return value;
}

void expect_token(std::istream& in, const std::string& token) {
  const auto got = read_value<std::string>(in, token.c_str());
  if (got != token) {
    throw Error(Errc::parse_error, "snapshot: expected '" + token + "', got '" + got + "'");
  }
}

}  // namespace

UserGraph GraphInit::build(std::size_t users) const {
  switch (kind) {
    case Kind::complete: return UserGraph::complete(users);
    case Kind::erdos_renyi: return UserGraph::erdos_renyi(users, p, seed);
    case Kind::empty: return UserGraph::empty(users);
  }
  return UserGraph::complete(users);
}

void ClubConfig::validate() const {
  if (!(lambda > 0.0)) throw Error(Errc::invalid_config, "lambda must be positive");
  if (!(alpha >= 0.0)) throw Error(Errc::invalid_config, "alpha must be nonnegative");
  if (beta && !(*beta >= 0.0)) throw Error(Errc::invalid_config, "beta must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::invalid_config, "delta must lie in (0,1)");
  if (K < 1 || d < 1 || horizon < 1 || m_guess < 1) {
    throw Error(Errc::invalid_config, "K, d, horizon and m_guess must be positive");
  }
  if (lambda < static_cast<double>(K)) {
    warn("lambda < K: the regret guarantee assumes lambda >= K");
  }
}

double deletion_threshold(double T_i, double T_l, double alpha) {
  return alpha * (confidence_radius(T_i) + confidence_radius(T_l));
}

double auto_beta(const ClubConfig& cfg, std::size_t m_guess, double horizon) {
  const double d = static_cast<double>(cfg.d);
  const double m = static_cast<double>(m_guess);
  return std::sqrt(d * std::log1p(horizon / (cfg.lambda * d)) + 2.0 * std::log(4.0 * m * horizon)) +
         std::sqrt(cfg.lambda);
}

std::vector<double> ucb_scores(const Vector& theta_hat, const CholeskyFactor& m_chol, double beta,
                               std::span<const ItemFeature> pool) {
  if (pool.empty()) return {};
  const Matrix xs = columns_of(pool, theta_hat.size());
  const Vector widths = quad_form_inv_columns(m_chol, xs);
  const Vector means = xs.transpose() * theta_hat;
  std::vector<double> scores(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const auto i = static_cast<Index>(j);
    scores[j] = std::min(means[i] + beta * std::sqrt(widths[i]), 1.0);
  }
  return scores;
}

ClubLearner::ClubLearner(ClubConfig cfg, std::size_t users)
    : cfg_(std::move(cfg)),
      stats_(users, UserStats(static_cast<Index>(cfg_.d))),
      graph_(cfg_.init.build(users)) {
  cfg_.validate();
  fixed_beta_ = cfg_.beta ? *cfg_.beta
                          : auto_beta(cfg_, cfg_.m_guess, static_cast<double>(cfg_.horizon));
}

ComponentAggregate ClubLearner::component_aggregate(std::size_t user) const {
  const auto dim = static_cast<Index>(cfg_.d);
  ComponentAggregate agg{SymMatrix::identity(dim, cfg_.lambda), Vector::Zero(dim),
                         Vector::Zero(dim), 0, graph_.component_members(user)};
  for (std::size_t member : agg.members) {
    agg.M += stats_[member].S;
    agg.b += stats_[member].b;
    agg.T += stats_[member].T;
  }
  agg.theta_hat = cholesky(agg.M).solve(agg.b);
  return agg;
}

double ClubLearner::beta_for(const ComponentAggregate& aggregate) const {
  if (cfg_.beta || cfg_.beta_schedule == BetaSchedule::fixed_horizon) return fixed_beta_;
  return bounds::beta_linear(static_cast<double>(aggregate.T), cfg_.delta,
                             static_cast<double>(cfg_.d), cfg_.lambda);
}

ItemList ClubLearner::recommend(std::size_t user, std::span<const ItemFeature> pool) const {
  if (pool.size() < cfg_.K) {
    throw Error(Errc::pool_too_small, "pool of " + std::to_string(pool.size()) +
                                          " items cannot fill a list of " +
                                          std::to_string(cfg_.K));
  }
  const ComponentAggregate agg = component_aggregate(user);
  const CholeskyFactor chol = cholesky(agg.M);
  const std::vector<double> scores = ucb_scores(agg.theta_hat, chol, beta_for(agg), pool);
  ItemList list;
  list.reserve(cfg_.K);
  for (std::size_t idx : select_top_k(pool, scores, cfg_.K)) list.push_back(pool[idx]);
  require_distinct_ids(list);
  return list;
}

void ClubLearner::update(std::size_t user, std::span<const ItemFeature> list,
                         const CascadeOutcome& outcome) {
  if (outcome.list_length() != list.size() || outcome.examined() > list.size()) {
    throw Error(Errc::inconsistent_outcome,
                "outcome for a list of " + std::to_string(outcome.list_length()) +
                    " items applied to a list of " + std::to_string(list.size()));
  }
  UserStats& s = stats_.at(user);
  for (std::size_t k = 0; k < outcome.examined(); ++k) s.S.add_outer(list[k].x);
  if (outcome.clicked()) s.b += list[outcome.position() - 1].x;
  s.T += outcome.examined();
  s.theta_hat = ridge_estimate(s.S, s.b, cfg_.lambda);
}

std::size_t ClubLearner::prune_edges(std::size_t user, double alpha) {
  const UserStats& me = stats_.at(user);
  const std::vector<std::size_t> neighbors = graph_.neighbors(user);
  std::size_t removed = 0;
  for (std::size_t other : neighbors) {
    const UserStats& them = stats_[other];
    const double threshold =
        deletion_threshold(static_cast<double>(me.T), static_cast<double>(them.T), alpha);
    if ((me.theta_hat - them.theta_hat).norm() >= threshold) {
      graph_.remove_edge(user, other);
      ++removed;
    }
  }
  return removed;
}

StepResult ClubLearner::step(std::size_t user, std::span<const ItemFeature> pool,
                             const FeedbackFn& feedback) {
  ItemList list = recommend(user, pool);
  CascadeOutcome outcome = feedback(list);
  update(user, list, outcome);
  prune_edges(user);
  return {std::move(list), std::move(outcome)};
}

void ClubLearner::save_snapshot(std::ostream& out) const {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << kSnapshotHeader << '\n';
  buf << "users " << users() << '\n';
  buf << "dim " << cfg_.d << '\n';
  buf << "lambda " << cfg_.lambda << '\n';
  const auto dim = static_cast<Index>(cfg_.d);
  for (std::size_t i = 0; i < users(); ++i) {
    const UserStats& s = stats_[i];
    buf << "user " << i << " T " << s.T << '\n';
    buf << 'S';
    for (Index r = 0; r < dim; ++r) {
      for (Index c = 0; c <= r; ++c) buf << ' ' << s.S(r, c);
    }
    buf << "\nb";
    for (Index r = 0; r < dim; ++r) buf << ' ' << s.b[r];
    buf << '\n';
  }
  const auto edges = graph_.edges();
  buf << "edges " << edges.size() << '\n';
  for (auto [a, b] : edges) buf << a << ' ' << b << '\n';
  out << buf.str();
}

ClubLearner ClubLearner::load_snapshot(std::istream& in, ClubConfig cfg) {
  std::string header;
  std::getline(in, header);
  if (header != kSnapshotHeader) {
    throw Error(Errc::parse_error, "snapshot: unsupported header '" + header + "'");
  }
  expect_token(in, "users");
  const auto users = read_value<std::size_t>(in, "user count");
  expect_token(in, "dim");
  const auto dim = read_value<std::size_t>(in, "dimension");
  expect_token(in, "lambda");
  const auto lambda = read_value<double>(in, "lambda");
  if (dim != cfg.d) throw Error(Errc::dimension_mismatch, "snapshot dimension differs from config");
  if (lambda != cfg.lambda) warn("snapshot lambda differs from config; using the config value");

  cfg.init = GraphInit::empty();
  ClubLearner learner(std::move(cfg), users);
  const auto d = static_cast<Index>(dim);
  for (std::size_t i = 0; i < users; ++i) {
    expect_token(in, "user");
    if (read_value<std::size_t>(in, "user index") != i) {
      throw Error(Errc::parse_error, "snapshot: users out of order");
    }
    expect_token(in, "T");
    UserStats& s = learner.stats_[i];
    s.T = read_value<std::size_t>(in, "T");
    expect_token(in, "S");
    Matrix dense(d, d);
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c <= r; ++c) {
        dense(r, c) = read_value<double>(in, "S entry");
        dense(c, r) = dense(r, c);
      }
    }
    s.S = SymMatrix::from_dense(dense);
    expect_token(in, "b");
    for (Index r = 0; r < d; ++r) s.b[r] = read_value<double>(in, "b entry");
    s.theta_hat = ridge_estimate(s.S, s.b, learner.cfg_.lambda);
  }
  expect_token(in, "edges");
  const auto count = read_value<std::size_t>(in, "edge count");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(count);
  for (std::size_t e = 0; e < count; ++e) {
    const auto a = read_value<std::size_t>(in, "edge endpoint");
    const auto b = read_value<std::size_t>(in, "edge endpoint");
    edges.emplace_back(a, b);
  }
  learner.graph_ = UserGraph::from_edges(users, edges);
  return learner;
}

}  // namespace clubcascade
