#pragma once

#include "clubcascade/environment.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace clubcascade {

// Binary user-item matrix stored as sorted per-user rows of positive items.
class RatingsMatrix {
 public:
  RatingsMatrix() = default;
  RatingsMatrix(std::size_t n_users, std::size_t n_items);
  static RatingsMatrix from_pairs(std::size_t n_users, std::size_t n_items,
                                  std::vector<std::pair<std::size_t, std::size_t>> positives);

  std::size_t n_users() const noexcept { return rows_.size(); }
  std::size_t n_items() const noexcept { return n_items_; }
  std::size_t positive_count() const noexcept;
  const std::vector<std::size_t>& row(std::size_t user) const { return rows_.at(user); }
  bool contains(std::size_t user, std::size_t item) const;
  std::vector<std::pair<std::size_t, std::size_t>> positives() const;
  Matrix dense() const;

  // Original ids by dense index; empty for generated matrices.
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

 private:
  std::size_t n_items_ = 0;
  std::vector<std::vector<std::size_t>> rows_;
};

/// Parses `user_id,item_id[,rating]` rows; an optional first line starting with
/// `user` is a header. Rows with a rating below `threshold` are not positives
/// but still claim dense ids. Dense ids follow first appearance.
RatingsMatrix parse_ratings(std::istream& in, double threshold);
RatingsMatrix load_ratings(const std::filesystem::path& path, double threshold);

void write_ratings(std::ostream& out, const RatingsMatrix& m);
/// `orig_id,dense_id` lines for one axis.
void write_id_map(std::ostream& out, const std::vector<std::string>& ids);

struct ReplaySplit {
  RatingsMatrix H;  // feature-extraction users
  RatingsMatrix F;  // replay users
  std::vector<std::size_t> feature_users;  // source row of each H row
  std::vector<std::size_t> replay_users;   // source row of each F row
};

/// Uniform random disjoint split; throws TooFewUsers unless n_feature_users < n_users.
ReplaySplit split_users(const RatingsMatrix& m, std::size_t n_feature_users, std::uint64_t seed);

struct FeatureSet {
  ItemList items;  // item id = dense item index
  Vector singulars;
  bool rank_deficient = false;
};

/// Row j of V·diag(σ) from the rank-d truncated SVD of H, rescaled by the
/// largest row norm so every feature lies in the unit ball.
FeatureSet extract_features(const RatingsMatrix& H, std::size_t d);

/// `item_id,v1,...,vd` with 17 significant digits.
void write_features(std::ostream& out, std::span<const ItemFeature> items);

/// First listed item the user has a positive for, else no click.
CascadeOutcome replay_feedback(const RatingsMatrix& F, std::size_t user,
                               std::span<const ItemFeature> list);

/// Prefix sums of click indicators.
std::vector<std::size_t> cumulative_clicks(std::span<const CascadeOutcome> log);

struct ClusteredMatrixSpec {
  std::size_t users = 300;
  std::size_t items = 1000;
  std::size_t clusters = 5;
  std::size_t favored_items = 100;  // per cluster
  double p_favored = 0.3;
  double p_other = 0.01;
};

/// Each latent cluster draws a favored item subset; a user is positive on a
/// favored item with p_favored and on any other item with p_other.
RatingsMatrix generate_clustered_matrix(const ClusteredMatrixSpec& spec, std::uint64_t seed,
                                        std::vector<std::size_t>* cluster_of_user = nullptr);

}  // namespace clubcascade
