#include "clubcascade/experiment.hpp"

#include "clubcascade/baselines.hpp"
#include "clubcascade/bounds.hpp"
#include "clubcascade/error.hpp"
#include "clubcascade/rng.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <thread>

namespace clubcascade {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(Errc::invalid_config,
              "bad value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  value = trim(value);
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    bad_value(key, value);
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
  return parse_number<double>(key, value);
}

std::optional<double> parse_auto_real(std::string_view key, std::string_view value) {
  if (trim(value) == "auto") return std::nullopt;
  return parse_real(key, value);
}

bool parse_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Fn>
std::vector<CellResult> run_cells(const ExperimentConfig& cfg, Fn&& fn) {
  struct Cell {
    Algorithm algorithm;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Algorithm a : cfg.algorithms) {
    for (std::uint64_t s : cfg.seeds) cells.push_back({a, s});
  }
  std::vector<CellResult> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] = fn(cells[i].algorithm, cells[i].seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(cfg.threads, std::max<std::size_t>(cells.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

bool record_due(std::size_t t, const ExperimentConfig& cfg) {
  return t % cfg.stride == 0 || t == cfg.T;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::club: return "club";
    case Algorithm::club_glm: return "club_glm";
    case Algorithm::single_cluster: return "single_cluster";
    case Algorithm::per_user: return "per_user";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  name = trim(name);
  if (name == "club") return Algorithm::club;
  if (name == "club_glm") return Algorithm::club_glm;
  if (name == "single_cluster") return Algorithm::single_cluster;
  if (name == "per_user") return Algorithm::per_user;
  throw Error(Errc::invalid_config, "unknown algorithm '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::invalid_config, what);
  };
  require(u >= 1 && m >= 1 && K >= 1 && d >= 1, "u, m, K and d must be positive");
  require(m <= u, "m must not exceed u");
  require(K <= L, "K must not exceed L");
  require(lambda > 0.0, "lambda must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(!alpha || *alpha >= 0.0, "alpha must be nonnegative");
  require(!beta || *beta >= 0.0, "beta must be nonnegative");
  require(!lambda_x || (*lambda_x > 0.0 && *lambda_x <= 1.0), "lambda_x must lie in (0, 1]");
  require(init_p >= 0.0 && init_p <= 1.0, "init_p must lie in [0, 1]");
  require(m_guess >= 1, "m_guess must be positive");
  require(mle_reg > 0.0, "mle_reg must be positive");
  require(stride >= 1, "stride must be positive");
  require(threads >= 1, "threads must be positive");
  require(!algorithms.empty(), "no algorithms selected");
  require(!seeds.empty(), "no seeds given");
  require(bounds_trials_scale >= 0.0, "bounds_trials_scale must be nonnegative");
  if (theta_mode.kind == ThetaMode::Kind::gap) {
    require(theta_mode.gamma > 0.0 && theta_mode.gamma <= 2.0, "gamma must lie in (0, 2]");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "scenario",      "u",           "m",             "L",
      "K",             "d",           "T",             "theta_mode",
      "gamma",         "lambda",      "alpha",         "beta",
      "beta_schedule", "delta",       "m_guess",       "lambda_x",
      "init",          "init_p",      "link",          "mle_reg",
      "algorithms",    "seeds",       "stride",        "threads",
      "out",           "ratings",     "threshold",     "feature_users",
      "subsample",     "split_seed",  "matrix_users",  "matrix_items",
      "matrix_clusters", "matrix_favored", "p_favored", "p_other",
      "matrix_seed",   "save_ratings", "bounds_trials_scale", "bounds_invert"};
  return keys;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  auto size = [&] { return parse_number<std::size_t>(key, value); };
  auto u64 = [&] { return parse_number<std::uint64_t>(key, value); };
  auto real = [&] { return parse_real(key, value); };

  if (key == "scenario") {
    if (value == "synth") cfg.scenario = Scenario::synth;
    else if (value == "replay") cfg.scenario = Scenario::replay;
    else if (value == "bounds_check" || value == "bounds-check") cfg.scenario = Scenario::bounds_check;
    else bad_value(key, value);
  } else if (key == "u") {
    cfg.u = size();
  } else if (key == "m") {
    cfg.m = size();
  } else if (key == "L") {
    cfg.L = size();
  } else if (key == "K") {
    cfg.K = size();
  } else if (key == "d") {
    cfg.d = size();
  } else if (key == "T") {
    cfg.T = size();
  } else if (key == "theta_mode") {
    if (value == "orthogonal") {
      cfg.theta_mode.kind = ThetaMode::Kind::orthogonal;
    } else if (value == "gap") {
      cfg.theta_mode.kind = ThetaMode::Kind::gap;
    } else if (value.substr(0, 4) == "gap:") {
      cfg.theta_mode = ThetaMode::gap(parse_real(key, value.substr(4)));
    } else {
      bad_value(key, value);
    }
  } else if (key == "gamma") {
    cfg.theta_mode.gamma = real();
  } else if (key == "lambda") {
    cfg.lambda = real();
  } else if (key == "alpha") {
    cfg.alpha = parse_auto_real(key, value);
  } else if (key == "beta") {
    cfg.beta = parse_auto_real(key, value);
  } else if (key == "beta_schedule") {
    if (value == "fixed_horizon") cfg.beta_schedule = BetaSchedule::fixed_horizon;
    else if (value == "anytime") cfg.beta_schedule = BetaSchedule::anytime;
    else bad_value(key, value);
  } else if (key == "delta") {
    cfg.delta = real();
  } else if (key == "m_guess") {
    cfg.m_guess = size();
  } else if (key == "lambda_x") {
    cfg.lambda_x = parse_auto_real(key, value);
  } else if (key == "init") {
    if (value == "complete") cfg.init = GraphInit::Kind::complete;
    else if (value == "erdos_renyi") cfg.init = GraphInit::Kind::erdos_renyi;
    else if (value == "empty") cfg.init = GraphInit::Kind::empty;
    else bad_value(key, value);
  } else if (key == "init_p") {
    cfg.init_p = real();
  } else if (key == "link") {
    if (value == "logistic") cfg.link = Link::logistic;
    else if (value == "identity") cfg.link = Link::identity;
    else bad_value(key, value);
  } else if (key == "mle_reg") {
    cfg.mle_reg = real();
  } else if (key == "algorithms") {
    cfg.algorithms.clear();
    for (auto name : split_list(value)) cfg.algorithms.push_back(parse_algorithm(name));
  } else if (key == "seeds" || key == "seed") {
    cfg.seeds.clear();
    for (auto s : split_list(value)) cfg.seeds.push_back(parse_number<std::uint64_t>(key, s));
  } else if (key == "stride") {
    cfg.stride = size();
  } else if (key == "threads") {
    cfg.threads = size();
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else if (key == "ratings") {
    cfg.ratings = std::string(value);
  } else if (key == "threshold") {
    cfg.threshold = real();
  } else if (key == "feature_users") {
    cfg.feature_users = size();
  } else if (key == "subsample") {
    cfg.subsample = size();
  } else if (key == "split_seed") {
    cfg.split_seed = u64();
  } else if (key == "matrix_users") {
    cfg.matrix.users = size();
  } else if (key == "matrix_items") {
    cfg.matrix.items = size();
  } else if (key == "matrix_clusters") {
    cfg.matrix.clusters = size();
  } else if (key == "matrix_favored") {
    cfg.matrix.favored_items = size();
  } else if (key == "p_favored") {
    cfg.matrix.p_favored = real();
  } else if (key == "p_other") {
    cfg.matrix.p_other = real();
  } else if (key == "matrix_seed") {
    cfg.matrix_seed = u64();
  } else if (key == "save_ratings") {
    cfg.save_ratings = std::string(value);
  } else if (key == "bounds_trials_scale") {
    cfg.bounds_trials_scale = real();
  } else if (key == "bounds_invert") {
    cfg.bounds_invert = parse_bool(key, value);
  } else {
    throw Error(Errc::invalid_config, "unknown config key '" + std::string(key) + "'");
  }
}

void apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::parse_error, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(cfg, view.substr(0, eq), view.substr(eq + 1));
  }
}

ClubConfig club_config(const ExperimentConfig& cfg, double lambda_x, std::uint64_t seed) {
  ClubConfig c;
  c.lambda = cfg.lambda;
  if (cfg.alpha) {
    c.alpha = *cfg.alpha;
  } else if (lambda_x > 0.0) {
    c.alpha = bounds::alpha_default(static_cast<double>(cfg.d), lambda_x);
  } else {
    warn("lambda_x is zero; edge deletion disabled");
    c.alpha = kNoDeletion;
  }
  c.beta = cfg.beta;
  c.beta_schedule = cfg.beta_schedule;
  c.delta = cfg.delta;
  c.m_guess = cfg.m_guess;
  c.K = cfg.K;
  c.d = cfg.d;
  c.horizon = std::max<std::size_t>(cfg.T, 1);
  switch (cfg.init) {
    case GraphInit::Kind::complete: c.init = GraphInit::complete(); break;
    case GraphInit::Kind::empty: c.init = GraphInit::empty(); break;
    case GraphInit::Kind::erdos_renyi:
      c.init = GraphInit::erdos_renyi(cfg.init_p, rng::derive(seed, rng::Purpose::graph));
      break;
  }
  return c;
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg, Algorithm algorithm,
                                      std::size_t users, double lambda_x, std::uint64_t seed) {
  ClubConfig base = club_config(cfg, lambda_x, seed);
  switch (algorithm) {
    case Algorithm::club: return std::make_unique<ClubLearner>(std::move(base), users);
    case Algorithm::single_cluster:
      return std::make_unique<ClubLearner>(
          make_baseline(BaselineKind::single_cluster, std::move(base), users));
    case Algorithm::per_user:
      return std::make_unique<ClubLearner>(
          make_baseline(BaselineKind::per_user, std::move(base), users));
    case Algorithm::club_glm: {
      GlmConfig g;
      g.base = std::move(base);
      g.link = cfg.link;
      g.mle_reg = cfg.mle_reg;
      g.lambda_x = lambda_x > 0.0 ? std::min(lambda_x, 1.0) : 1.0;
      g.alpha = cfg.alpha;
      return std::make_unique<GlmClubLearner>(std::move(g), users);
    }
  }
  throw Error(Errc::invalid_config, "unknown algorithm");
}

CellResult run_synth_cell(const ExperimentConfig& cfg, Algorithm algorithm, std::uint64_t seed) {
  const ClusterModel model = gen_clusters(cfg.u, cfg.m, cfg.d, cfg.theta_mode, seed);
  const ItemPool pool = gen_item_pool(cfg.L, cfg.d, seed);
  const double lambda_x = cfg.lambda_x.value_or(item_pool_lambda_x(cfg.d));
  std::unique_ptr<Learner> learner = make_learner(cfg, algorithm, cfg.u, lambda_x, seed);

  std::vector<double> best(model.clusters());
  for (std::size_t c = 0; c < model.clusters(); ++c) {
    best[c] = expected_reward(optimal_list(pool.items, model.theta[c], cfg.K), model.theta[c]);
  }

  CellResult result;
  result.algorithm = algorithm;
  result.seed = seed;
  result.true_clusters = model.assignment;
  const std::string name(to_string(algorithm));
  double regret = 0.0;
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    rng::Engine gen = rng::stream(seed, rng::Purpose::round, t);
    const std::size_t user = rng::uniform_index(gen, cfg.u);
    const Vector& theta = model.theta_of_user(user);
    const StepResult step = learner->step(
        user, pool.items,
        [&](std::span<const ItemFeature> list) { return cascade_feedback(list, theta, gen); });
    regret += std::max(0.0, best[model.assignment[user]] - expected_reward(step.list, theta));
    if (record_due(t, cfg)) result.records.push_back({t, name, seed, regret});
  }
  result.final_metric = regret;
  result.final_components = learner->graph().component_labels();
  return result;
}

ReplayData prepare_replay(const ExperimentConfig& cfg) {
  ReplayData data;
  data.ratings = cfg.ratings.empty() ? generate_clustered_matrix(cfg.matrix, cfg.matrix_seed)
                                     : load_ratings(cfg.ratings, cfg.threshold);
  if (!cfg.save_ratings.empty()) {
    std::ofstream out(cfg.save_ratings);
    if (!out) throw Error(Errc::io_error, "cannot write " + cfg.save_ratings);
    write_ratings(out, data.ratings);
  }
  data.split = split_users(data.ratings, cfg.feature_users, cfg.split_seed);
  data.features = extract_features(data.split.H, cfg.d);
  if (data.features.items.size() < cfg.K) {
    throw Error(Errc::pool_too_small, "fewer items than the list length");
  }
  SymMatrix second(static_cast<Index>(cfg.d));
  const double w = 1.0 / static_cast<double>(data.features.items.size());
  for (const ItemFeature& item : data.features.items) second.add_outer(item.x, w);
  data.lambda_x_hat = data.features.rank_deficient ? 0.0 : min_eigenvalue(second);
  return data;
}

CellResult run_replay_cell(const ExperimentConfig& cfg, const ReplayData& data,
                           Algorithm algorithm, std::uint64_t seed) {
  const RatingsMatrix& F = data.split.F;
  const std::size_t users = F.n_users();
  const ItemList& all = data.features.items;
  const double lambda_x = cfg.lambda_x.value_or(std::min(data.lambda_x_hat, 1.0));
  std::unique_ptr<Learner> learner = make_learner(cfg, algorithm, users, lambda_x, seed);

  const bool sample = cfg.subsample > 0 && cfg.subsample < all.size();
  if (sample && cfg.subsample < cfg.K) {
    throw Error(Errc::invalid_config, "subsample must be at least K");
  }
  std::vector<std::size_t> order(all.size());
  ItemList candidates;

  CellResult result;
  result.algorithm = algorithm;
  result.seed = seed;
  const std::string name(to_string(algorithm));
  std::size_t clicks = 0;
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    rng::Engine gen = rng::stream(seed, rng::Purpose::replay_users, t);
    const std::size_t user = rng::uniform_index(gen, users);
    std::span<const ItemFeature> pool(all);
    if (sample) {
      rng::Engine item_gen = rng::stream(seed, rng::Purpose::replay_items, t);
      std::iota(order.begin(), order.end(), std::size_t{0});
      candidates.clear();
      for (std::size_t i = 0; i < cfg.subsample; ++i) {
        std::swap(order[i], order[i + rng::uniform_index(item_gen, order.size() - i)]);
        candidates.push_back(all[order[i]]);
      }
      pool = candidates;
    }
    const StepResult step = learner->step(
        user, pool, [&](std::span<const ItemFeature> list) { return replay_feedback(F, user, list); });
    clicks += step.outcome.clicked() ? 1 : 0;
    if (record_due(t, cfg)) {
      result.records.push_back({t, name, seed, static_cast<double>(clicks)});
    }
  }
  result.final_metric = static_cast<double>(clicks);
  result.final_components = learner->graph().component_labels();
  return result;
}

std::vector<CellResult> run_synth(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_cells(cfg, [&](Algorithm a, std::uint64_t s) { return run_synth_cell(cfg, a, s); });
}

std::vector<CellResult> run_replay(const ExperimentConfig& cfg, const ReplayData& data) {
  cfg.validate();
  return run_cells(cfg,
                   [&](Algorithm a, std::uint64_t s) { return run_replay_cell(cfg, data, a, s); });
}

bounds::CheckConfig check_config(const ExperimentConfig& cfg) {
  bounds::CheckConfig c;
  c.seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
  c.delta = cfg.delta;
  c.invert = cfg.bounds_invert;
  auto scale = [&](std::size_t n) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.bounds_trials_scale));
  };
  c.det_trials = scale(c.det_trials);
  c.self_norm_trials = scale(c.self_norm_trials);
  c.lambda_min_trials = scale(c.lambda_min_trials);
  c.bernstein_trials = scale(c.bernstein_trials);
  c.log_dominance_trials = scale(c.log_dominance_trials);
  c.gamma_trials = scale(c.gamma_trials);
  c.ellipsoid_trials = scale(c.ellipsoid_trials);
  return c;
}

void write_records(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "t,algorithm,seed,metric\n";
  for (const CellResult& cell : cells) {
    for (const RunRecord& r : cell.records) {
      out << r.t << ',' << r.algorithm << ',' << r.seed << ',' << format_real(r.metric) << '\n';
    }
  }
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.substr(0, 2) == "t,") continue;
    const auto fields = split_list(view);
    if (fields.size() != 4) {
      throw Error(Errc::parse_error, "records line " + std::to_string(line_no) +
                                         ": expected t,algorithm,seed,metric");
    }
    try {
      records.push_back({parse_number<std::size_t>("t", fields[0]), std::string(fields[1]),
                         parse_number<std::uint64_t>("seed", fields[2]),
                         parse_real("metric", fields[3])});
    } catch (const Error& e) {
      throw Error(Errc::parse_error, "records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  std::vector<std::string> algorithms;
  for (const RunRecord& r : records) {
    if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end()) {
      algorithms.push_back(r.algorithm);
    }
  }
  // (algorithm rank, t) -> (seed, metric) values, summed in seed order.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::uint64_t, double>>> groups;
  for (const RunRecord& r : records) {
    const auto rank = static_cast<std::size_t>(
        std::find(algorithms.begin(), algorithms.end(), r.algorithm) - algorithms.begin());
    groups[{rank, r.t}].emplace_back(r.seed, r.metric);
  }
  std::vector<AggregateRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (const auto& v : values) sum += v.second;
    rows.push_back({key.second, algorithms[key.first], sum / static_cast<double>(values.size()),
                    values.size()});
  }
  return rows;
}

void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "t,algorithm,mean,seeds\n";
  for (const AggregateRow& r : rows) {
    out << r.t << ',' << r.algorithm << ',' << format_real(r.mean) << ',' << r.seeds << '\n';
  }
}

}  // namespace clubcascade
