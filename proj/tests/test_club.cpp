#include "doctest.h"
#include "oracles.hpp"

#include "clubcascade/bounds.hpp"
#include "clubcascade/club.hpp"
#include "clubcascade/error.hpp"

#include <cmath>
#include <sstream>

using namespace clubcascade;

namespace {

ClubConfig small_config(std::size_t d, std::size_t K) {
  ClubConfig cfg;
  cfg.d = d;
  cfg.K = K;
  cfg.lambda = static_cast<double>(K);
  cfg.horizon = 1000;
  return cfg;
}

// Snapshot text for users with S = 0, the given b vectors and T counts.
std::string snapshot_text(double lambda, const std::vector<Vector>& b, const std::vector<std::size_t>& T,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::ostringstream out;
  out.precision(17);
  const auto d = b.front().size();
  out << "club-state v1\nusers " << b.size() << "\ndim " << d << "\nlambda " << lambda << '\n';
  for (std::size_t i = 0; i < b.size(); ++i) {
    out << "user " << i << " T " << T[i] << "\nS";
    for (Index k = 0; k < d * (d + 1) / 2; ++k) out << " 0";
    out << "\nb";
    for (Index k = 0; k < d; ++k) out << ' ' << b[i](k);
    out << '\n';
  }
  out << "edges " << edges.size() << '\n';
  for (auto [x, y] : edges) out << x << ' ' << y << '\n';
  return out.str();
}

ClubLearner from_snapshot(const std::string& text, ClubConfig cfg) {
  std::istringstream in(text);
  return ClubLearner::load_snapshot(in, std::move(cfg));
}

FeedbackFn bernoulli_feedback(const Vector& theta, rng::Engine& gen) {
  return [&gen, theta](std::span<const ItemFeature> list) { return cascade_feedback(list, theta, gen); };
}

}  // namespace

TEST_CASE("init_learner graph shapes and zeroed statistics") {
  auto cfg = small_config(3, 2);
  const auto one = init_learner(cfg, 1);
  CHECK(one.graph().component_count() == 1);
  CHECK(one.graph().edge_count() == 0);
  const auto four = init_learner(cfg, 4);
  CHECK(four.graph().edge_count() == 6);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(four.stats(i).T == 0);
    CHECK(four.stats(i).S.dense().isZero());
    CHECK(four.stats(i).b.isZero());
  }
  cfg.init = GraphInit::erdos_renyi(0.5, 9);
  const auto er = init_learner(cfg, 40);
  CHECK(std::abs(static_cast<double>(er.graph().edge_count()) - 390.0) <= 4.0 * std::sqrt(195.0));
}

TEST_CASE("component_aggregate on fresh, isolated and path graphs") {
  auto cfg = small_config(3, 2);
  const auto fresh = init_learner(cfg, 3);
  const auto agg = fresh.component_aggregate(1);
  CHECK(agg.M.dense().isApprox(2.0 * Matrix::Identity(3, 3)));
  CHECK(agg.theta_hat.isZero());

  Vector b0(3), b1(3), b2(3);
  b0 << 0.3, 0.0, 0.1;
  b1 << 0.0, 0.5, 0.0;
  b2 << 0.2, 0.2, 0.2;
  auto isolated = from_snapshot(snapshot_text(2.0, {b0, Vector::Zero(3)}, {3, 0}, {}), cfg);
  const auto lone = isolated.component_aggregate(1);
  CHECK(lone.M.dense().isApprox(2.0 * Matrix::Identity(3, 3)));
  CHECK(lone.b.isZero());

  // Path 0-1-2 with nonzero S: M and b are direct sums over all three users.
  auto path = init_learner(cfg, 3);
  auto gen = rng::stream(1, rng::Purpose::trial);
  const auto pool = oracle::random_items(gen, 6, 3);
  std::vector<Matrix> S(3, Matrix::Zero(3, 3));
  std::vector<Vector> b(3, Vector::Zero(3));
  for (std::size_t u = 0; u < 3; ++u) {
    const ItemList list{pool[2 * u], pool[2 * u + 1]};
    path.update(u, list, CascadeOutcome::click_at(2, 2));
    for (const auto& it : list) S[u] += it.x * it.x.transpose();
    b[u] += list[1].x;
  }
  std::ostringstream snap;
  path.save_snapshot(snap);
  std::string text = snap.str();
  text = text.substr(0, text.find("edges")) + "edges 2\n0 1\n1 2\n";
  const auto loaded = from_snapshot(text, cfg);
  const auto total = loaded.component_aggregate(2);
  const Matrix M = 2.0 * Matrix::Identity(3, 3) + S[0] + S[1] + S[2];
  const Vector bsum = b[0] + b[1] + b[2];
  CHECK((total.M.dense() - M).norm() <= 1e-14);
  CHECK((total.b - bsum).norm() <= 1e-14);
  CHECK((total.theta_hat - oracle::adjugate_inverse_3x3(M) * bsum).norm() <= 1e-12);
  CHECK(total.T == 6);
  CHECK(total.members == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("ucb_scores examples and explicit-inverse oracle") {
  const double lambda = 4.0;
  const auto chol = cholesky(SymMatrix::identity(3, lambda));
  const ItemList unit{{0, Vector::Unit(3, 1)}};
  CHECK(ucb_scores(Vector::Zero(3), chol, std::sqrt(lambda), unit)[0] == doctest::Approx(1.0));

  Vector theta(3);
  theta << 0.3, 0.0, 0.0;
  CHECK(ucb_scores(theta, chol, 0.0, {{{0, Vector::Unit(3, 0)}}})[0] == doctest::Approx(0.3));

  auto gen = rng::stream(2, rng::Purpose::trial);
  for (int trial = 0; trial < 200; ++trial) {
    SymMatrix M = SymMatrix::identity(3, 1.0);
    for (int k = 0; k < 5; ++k) M.add_outer(oracle::random_in_ball(gen, 3));
    const Vector th = oracle::random_vector(gen, 3) * 0.3;
    const double beta = rng::uniform01(gen);
    const auto pool = oracle::random_items(gen, 5, 3);
    const auto scores = ucb_scores(th, cholesky(M), beta, pool);
    const Matrix inv = oracle::adjugate_inverse_3x3(M.dense());
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const Vector& x = pool[j].x;
      const double expect = std::min(th.dot(x) + beta * std::sqrt(x.dot(inv * x)), 1.0);
      CHECK(scores[j] == doctest::Approx(expect).epsilon(1e-10));
      CHECK(scores[j] <= 1.0);
    }
  }
}

TEST_CASE("recommend examples") {
  auto cfg = small_config(2, 3);
  const auto learner = init_learner(cfg, 1);
  ItemList pool{{7, Vector::Zero(2)}, {3, Vector::Zero(2)}, {5, Vector::Zero(2)}, {1, Vector::Zero(2)}};
  const auto tied = learner.recommend(0, pool);
  REQUIRE(tied.size() == 3);
  CHECK(tied[0].id == 1);
  CHECK(tied[1].id == 3);
  CHECK(tied[2].id == 5);

  pool.resize(3);
  const auto whole = learner.recommend(0, pool);
  CHECK(whole.size() == 3);
  pool.resize(2);
  CHECK_THROWS_AS(learner.recommend(0, pool), Error);
}

TEST_CASE("recommend matches a brute-force sort of the scores") {
  auto gen = rng::stream(3, rng::Purpose::trial);
  for (int trial = 0; trial < 200; ++trial) {
    auto cfg = small_config(3, 3);
    cfg.beta = rng::uniform01(gen);
    auto learner = init_learner(cfg, 2);
    const auto pool = oracle::random_items(gen, 8, 3);
    const Vector theta = oracle::random_unit(gen, 3);
    auto fb = bernoulli_feedback(theta, gen);
    const std::size_t warmup = rng::uniform_index(gen, 10);
    for (std::size_t t = 0; t < warmup; ++t) learner.step(t % 2, pool, fb);
    const auto agg = learner.component_aggregate(0);
    const auto scores = ucb_scores(agg.theta_hat, cholesky(agg.M), *cfg.beta, pool);
    const auto expect = oracle::sort_top_k(pool, scores, 3);
    const auto got = learner.recommend(0, pool);
    for (std::size_t k = 0; k < 3; ++k) CHECK(got[k].id == pool[expect[k]].id);
  }
}

TEST_CASE("update for no-click and first-position click") {
  auto cfg = small_config(2, 4);
  auto learner = init_learner(cfg, 2);
  auto gen = rng::stream(4, rng::Purpose::trial);
  const auto list = oracle::random_items(gen, 4, 2);

  learner.update(0, list, CascadeOutcome::no_click(4));
  Matrix S = Matrix::Zero(2, 2);
  for (const auto& it : list) S += it.x * it.x.transpose();
  CHECK((learner.stats(0).S.dense() - S).norm() <= 1e-15);
  CHECK(learner.stats(0).b.isZero());
  CHECK(learner.stats(0).T == 4);

  learner.update(1, list, CascadeOutcome::click_at(1, 4));
  CHECK((learner.stats(1).S.dense() - list[0].x * list[0].x.transpose()).norm() <= 1e-15);
  CHECK((learner.stats(1).b - list[0].x).norm() == 0.0);
  CHECK(learner.stats(1).T == 1);
  CHECK(learner.stats(0).T == 4);

  CHECK_THROWS_AS(learner.update(0, list, CascadeOutcome::no_click(3)), Error);
}

TEST_CASE("statistics equal a recomputation from the full log") {
  auto cfg = small_config(4, 3);
  cfg.alpha = 0.5;
  auto learner = init_learner(cfg, 5);
  auto gen = rng::stream(5, rng::Purpose::trial);
  const auto pool = oracle::random_items(gen, 12, 4);
  const Vector theta = oracle::random_unit(gen, 4).cwiseAbs();
  auto fb = bernoulli_feedback(theta, gen);

  struct Entry { std::size_t user; ItemList list; CascadeOutcome outcome; };
  std::vector<Entry> log;
  auto edges_before = learner.graph().edges();
  for (int t = 0; t < 100; ++t) {
    const std::size_t user = rng::uniform_index(gen, 5);
    std::vector<UserStats> before;
    for (std::size_t i = 0; i < 5; ++i) before.push_back(learner.stats(i));
    auto r = learner.step(user, pool, fb);
    // Locality: every other user's statistics are untouched.
    for (std::size_t i = 0; i < 5; ++i) {
      if (i == user) continue;
      CHECK(learner.stats(i).T == before[i].T);
      CHECK(learner.stats(i).S.dense() == before[i].S.dense());
      CHECK(learner.stats(i).b == before[i].b);
    }
    // Edge monotonicity: the edge set only shrinks.
    const auto edges_after = learner.graph().edges();
    for (const auto& e : edges_after)
      CHECK(std::find(edges_before.begin(), edges_before.end(), e) != edges_before.end());
    edges_before = edges_after;
    log.push_back({user, std::move(r.list), std::move(r.outcome)});
  }
  for (std::size_t i = 0; i < 5; ++i) {
    Matrix S = Matrix::Zero(4, 4);
    Vector b = Vector::Zero(4);
    std::size_t T = 0;
    for (const auto& e : log) {
      if (e.user != i) continue;
      for (std::size_t k = 0; k < e.outcome.examined(); ++k) S += e.list[k].x * e.list[k].x.transpose();
      if (e.outcome.clicked()) b += e.list[e.outcome.position() - 1].x;
      T += e.outcome.examined();
    }
    const auto& s = learner.stats(i);
    CHECK((s.S.dense() - S).norm() <= 1e-12);
    CHECK((s.b - b).norm() <= 1e-12);
    CHECK(s.T == T);
    CHECK(s.S.trace() <= static_cast<double>(s.T) + 1e-12);
    CHECK((s.theta_hat - ridge_estimate(s.S, s.b, cfg.lambda)).norm() == 0.0);
  }
}

TEST_CASE("deletion_threshold examples") {
  CHECK(deletion_threshold(0, 0, 1.0) == doctest::Approx(2.0));
  CHECK(deletion_threshold(5, 9, 0.0) == 0.0);
  CHECK(deletion_threshold(std::exp(1.0) - 1.0, 0, 2.0) ==
        doctest::Approx(2.0 * (std::sqrt(2.0 / std::exp(1.0)) + 1.0)));
  CHECK(deletion_threshold(std::exp(1.0) - 1.0, 0, 2.0) == doctest::Approx(3.7155).epsilon(1e-4));
}

TEST_CASE("prune_edges straddles the threshold") {
  auto cfg = small_config(2, 2);
  const double lambda = cfg.lambda;
  const std::size_t T0 = 7, T1 = 3;
  const double thr = deletion_threshold(T0, T1, cfg.alpha);
  for (double eps : {1e-9, -1e-9}) {
    Vector b0 = Vector::Zero(2);
    b0(0) = lambda * (thr + eps);
    auto learner = from_snapshot(snapshot_text(lambda, {b0, Vector::Zero(2)}, {T0, T1}, {{0, 1}}), cfg);
    CHECK((learner.stats(0).theta_hat - learner.stats(1).theta_hat).norm() ==
          doctest::Approx(thr + eps).epsilon(1e-14));
    const std::size_t removed = learner.prune_edges(0);
    CHECK(removed == (eps > 0 ? 1u : 0u));
    CHECK(learner.graph().has_edge(0, 1) == (eps < 0));
  }
  // Equal estimates keep their edge; an isolated user has nothing to prune.
  auto same = from_snapshot(snapshot_text(lambda, {Vector::Ones(2), Vector::Ones(2)}, {4, 4}, {{0, 1}}), cfg);
  CHECK(same.prune_edges(0) == 0);
  auto lone = init_learner(cfg, 1);
  CHECK(lone.prune_edges(0) == 0);
}

TEST_CASE("auto_beta evaluation, monotonicity and consistency") {
  ClubConfig cfg;
  cfg.lambda = 4.0;
  cfg.d = 20;
  CHECK(auto_beta(cfg, 1, 1.0) ==
        doctest::Approx(std::sqrt(20.0 * std::log(1.0 + 1.0 / 80.0) + 2.0 * std::log(4.0)) + 2.0));
  double prev = 0.0;
  for (double T : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double b = auto_beta(cfg, 1, T);
    CHECK(b >= prev);
    prev = b;
  }
  cfg.lambda = 1.0;
  cfg.d = 1;
  for (double T : {1.0, 50.0, 5000.0})
    CHECK(auto_beta(cfg, 1, T) == doctest::Approx(bounds::beta_linear(T, 1.0 / (4.0 * T), 1, 1.0)));
}

TEST_CASE("step recommends the whole pool when K equals L") {
  auto cfg = small_config(3, 4);
  auto learner = init_learner(cfg, 2);
  auto gen = rng::stream(6, rng::Purpose::trial);
  const auto pool = oracle::random_items(gen, 4, 3);
  const auto r = learner.step(0, pool, [](std::span<const ItemFeature> l) { return CascadeOutcome::no_click(l.size()); });
  std::vector<std::size_t> ids;
  for (const auto& it : r.list) ids.push_back(it.id);
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("two rounds of step equal the manual composition") {
  auto cfg = small_config(3, 2);
  cfg.alpha = 0.3;
  auto a = init_learner(cfg, 3);
  auto b = init_learner(cfg, 3);
  auto gen = rng::stream(7, rng::Purpose::trial);
  const auto pool = oracle::random_items(gen, 6, 3);
  const Vector theta = oracle::random_unit(gen, 3).cwiseAbs();
  auto g1 = rng::stream(8, rng::Purpose::trial);
  auto g2 = rng::stream(8, rng::Purpose::trial);
  for (std::size_t user : {0u, 2u}) {
    const auto r = a.step(user, pool, bernoulli_feedback(theta, g1));
    const auto agg = b.component_aggregate(user);
    const auto scores = ucb_scores(agg.theta_hat, cholesky(agg.M), b.beta_for(agg), pool);
    ItemList list;
    for (auto i : select_top_k(pool, scores, cfg.K)) list.push_back(pool[i]);
    const auto outcome = cascade_feedback(list, theta, g2);
    b.update(user, list, outcome);
    b.prune_edges(user);
    CHECK(r.outcome == outcome);
    for (std::size_t k = 0; k < list.size(); ++k) CHECK(r.list[k].id == list[k].id);
  }
  CHECK(a.graph().edges() == b.graph().edges());
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.stats(i).theta_hat == b.stats(i).theta_hat);
}

TEST_CASE("anytime beta follows the component feedback count") {
  auto cfg = small_config(3, 2);
  cfg.beta_schedule = BetaSchedule::anytime;
  auto learner = init_learner(cfg, 2);
  auto gen = rng::stream(9, rng::Purpose::trial);
  const auto list = oracle::random_items(gen, 2, 3);
  learner.update(0, list, CascadeOutcome::no_click(2));
  const auto agg = learner.component_aggregate(1);
  CHECK(agg.T == 2);
  CHECK(learner.beta_for(agg) == doctest::Approx(bounds::beta_linear(2.0, cfg.delta, 3, cfg.lambda)));
  cfg.beta = 0.7;
  CHECK(init_learner(cfg, 2).beta_for(agg) == 0.7);
}

TEST_CASE("snapshot round trip is exact and resumes the same trajectory") {
  auto cfg = small_config(4, 3);
  cfg.alpha = 0.4;
  auto learner = init_learner(cfg, 6);
  auto gen = rng::stream(10, rng::Purpose::trial);
  const auto pool = oracle::random_items(gen, 10, 4);
  const Vector theta = oracle::random_unit(gen, 4).cwiseAbs();
  auto fb = bernoulli_feedback(theta, gen);
  for (int t = 0; t < 60; ++t) learner.step(rng::uniform_index(gen, 6), pool, fb);

  std::ostringstream first;
  learner.save_snapshot(first);
  CHECK(first.str().rfind("club-state v1\n", 0) == 0);
  auto restored = from_snapshot(first.str(), cfg);
  std::ostringstream second;
  restored.save_snapshot(second);
  CHECK(first.str() == second.str());

  auto ga = rng::stream(11, rng::Purpose::trial);
  auto gb = rng::stream(11, rng::Purpose::trial);
  for (int t = 0; t < 40; ++t) {
    const std::size_t user = static_cast<std::size_t>(t) % 6;
    const auto ra = learner.step(user, pool, bernoulli_feedback(theta, ga));
    const auto rb = restored.step(user, pool, bernoulli_feedback(theta, gb));
    CHECK(ra.outcome == rb.outcome);
  }
  CHECK(learner.graph().edges() == restored.graph().edges());

  CHECK_THROWS_AS(from_snapshot("club-state v0\n", cfg), Error);
  auto wrong_dim = cfg;
  wrong_dim.d = 5;
  CHECK_THROWS_AS(from_snapshot(first.str(), wrong_dim), Error);
}

TEST_CASE("ClubConfig validation") {
  ClubConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.lambda = 1.0;  // below K only warns
  CHECK_NOTHROW(cfg.validate());
  cfg.delta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
