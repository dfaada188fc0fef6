#pragma once

#include "clubcascade/bounds_check.hpp"
#include "clubcascade/club.hpp"
#include "clubcascade/environment.hpp"
#include "clubcascade/glm.hpp"
#include "clubcascade/replay.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clubcascade {

enum class Algorithm { club, club_glm, single_cluster, per_user };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

enum class Scenario { synth, replay, bounds_check };

struct ExperimentConfig {
  Scenario scenario = Scenario::synth;

  // Synthetic environment.
  std::size_t u = 40;
  std::size_t m = 5;
  std::size_t L = 200;
  std::size_t K = 4;
  std::size_t d = 20;
  std::size_t T = 20000;
  ThetaMode theta_mode = ThetaMode::orthogonal();

  // Learner.
  double lambda = 4.0;
  std::optional<double> alpha;     // empty: √(32d/λ_x)
  std::optional<double> beta;      // empty: horizon formula
  BetaSchedule beta_schedule = BetaSchedule::fixed_horizon;
  double delta = 0.1;
  std::size_t m_guess = 1;
  std::optional<double> lambda_x;  // empty: construction value (synth) or empirical (replay)
  GraphInit::Kind init = GraphInit::Kind::complete;
  double init_p = 0.5;
  Link link = Link::logistic;
  double mle_reg = kGlmDefaultReg;

  // Run plan.
  std::vector<Algorithm> algorithms{Algorithm::club, Algorithm::single_cluster,
                                    Algorithm::per_user};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t stride = 100;
  std::size_t threads = 1;
  std::string out;  // empty: stdout

  // Replay. An empty ratings path uses the clustered-matrix generator.
  std::string ratings;
  double threshold = 1.0;
  std::size_t feature_users = 100;
  std::size_t subsample = 0;  // 0: every item is a candidate each round
  std::uint64_t split_seed = 0;
  ClusteredMatrixSpec matrix;
  std::uint64_t matrix_seed = 0;
  std::string save_ratings;  // when set, the ratings actually used are written here

  // Bounds check.
  double bounds_trials_scale = 1.0;
  bool bounds_invert = false;

  void validate() const;
};

/// Applies one `key=value` setting; throws InvalidConfig for unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);
/// Flat key=value lines; `#` starts a comment.
void apply_config_text(ExperimentConfig& cfg, std::istream& in);
/// Every recognized key, in a stable order.
const std::vector<std::string>& config_keys();

struct RunRecord {
  std::size_t t = 0;
  std::string algorithm;
  std::uint64_t seed = 0;
  double metric = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct CellResult {
  Algorithm algorithm = Algorithm::club;
  std::uint64_t seed = 0;
  std::vector<RunRecord> records;
  double final_metric = 0.0;
  std::vector<std::size_t> final_components;  // component label per user
  std::vector<std::size_t> true_clusters;     // synthetic runs only
};

ClubConfig club_config(const ExperimentConfig& cfg, double lambda_x, std::uint64_t seed);
std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg, Algorithm algorithm,
                                      std::size_t users, double lambda_x, std::uint64_t seed);

CellResult run_synth_cell(const ExperimentConfig& cfg, Algorithm algorithm, std::uint64_t seed);

struct ReplayData {
  RatingsMatrix ratings;
  ReplaySplit split;
  FeatureSet features;
  double lambda_x_hat = 0.0;
};

ReplayData prepare_replay(const ExperimentConfig& cfg);
CellResult run_replay_cell(const ExperimentConfig& cfg, const ReplayData& data,
                           Algorithm algorithm, std::uint64_t seed);

/// All (algorithm, seed) cells on cfg.threads workers, in algorithm-major order.
std::vector<CellResult> run_synth(const ExperimentConfig& cfg);
std::vector<CellResult> run_replay(const ExperimentConfig& cfg, const ReplayData& data);

bounds::CheckConfig check_config(const ExperimentConfig& cfg);

/// `t,algorithm,seed,metric` with a header line.
void write_records(std::ostream& out, const std::vector<CellResult>& cells);
std::vector<RunRecord> read_records(std::istream& in);

struct AggregateRow {
  std::size_t t = 0;
  std::string algorithm;
  double mean = 0.0;
  std::size_t seeds = 0;
};

/// Mean metric over seeds per (algorithm, t); algorithms keep first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);
void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace clubcascade
