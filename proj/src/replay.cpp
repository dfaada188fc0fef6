#include "clubcascade/replay.hpp"

#include "clubcascade/error.hpp"
#include "clubcascade/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string_view>
#include <unordered_map>

namespace clubcascade {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

class IdIndex {
 public:
  std::size_t intern(std::string_view id) {
    auto [it, inserted] = index_.try_emplace(std::string(id), ids_.size());
    if (inserted) ids_.emplace_back(id);
    return it->second;
  }
  std::size_t size() const noexcept { return ids_.size(); }
  std::vector<std::string> take() { return std::move(ids_); }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> ids_;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RatingsMatrix::RatingsMatrix(std::size_t n_users, std::size_t n_items)
    : n_items_(n_items), rows_(n_users) {}

RatingsMatrix RatingsMatrix::from_pairs(std::size_t n_users, std::size_t n_items,
                                        std::vector<std::pair<std::size_t, std::size_t>> positives) {
  RatingsMatrix m(n_users, n_items);
  for (auto [u, i] : positives) {
    if (u >= n_users || i >= n_items) {
      throw Error(Errc::dimension_mismatch, "rating (" + std::to_string(u) + ", " +
                                                std::to_string(i) + ") out of range");
    }
    m.rows_[u].push_back(i);
  }
  for (auto& row : m.rows_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return m;
}

std::size_t RatingsMatrix::positive_count() const noexcept {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n;
}

bool RatingsMatrix::contains(std::size_t user, std::size_t item) const {
  const auto& r = rows_.at(user);
  return std::binary_search(r.begin(), r.end(), item);
}

std::vector<std::pair<std::size_t, std::size_t>> RatingsMatrix::positives() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(positive_count());
  for (std::size_t u = 0; u < rows_.size(); ++u) {
    for (std::size_t i : rows_[u]) out.emplace_back(u, i);
  }
  return out;
}

Matrix RatingsMatrix::dense() const {
  Matrix h = Matrix::Zero(static_cast<Index>(n_users()), static_cast<Index>(n_items_));
  for (std::size_t u = 0; u < rows_.size(); ++u) {
    for (std::size_t i : rows_[u]) h(static_cast<Index>(u), static_cast<Index>(i)) = 1.0;
  }
  return h;
}

RatingsMatrix parse_ratings(std::istream& in, double threshold) {
  IdIndex users;
  IdIndex items;
  std::vector<std::pair<std::size_t, std::size_t>> positives;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_rows = 0;
  bool first_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") {
      view = trim(view.substr(3));
    }
    if (view.empty()) continue;
    const bool header = first_line && view.substr(0, 4) == "user";
    first_line = false;
    if (header) continue;
    const auto fields = split_commas(view);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) +
                                         ": expected user_id,item_id[,rating]");
    }
    bool positive = true;
    if (fields.size() == 3) {
      double rating = 0.0;
      const auto* first = fields[2].data();
      const auto* last = first + fields[2].size();
      const auto [ptr, ec] = std::from_chars(first, last, rating);
      if (ec != std::errc() || ptr != last) {
        throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": bad rating '" +
                                           std::string(fields[2]) + "'");
      }
      positive = rating >= threshold;
    }
    const std::size_t u = users.intern(fields[0]);
    const std::size_t i = items.intern(fields[1]);
    if (positive) positives.emplace_back(u, i);
    ++data_rows;
  }
  if (data_rows == 0) throw Error(Errc::empty_input, "no rating rows");
  RatingsMatrix m = RatingsMatrix::from_pairs(users.size(), items.size(), std::move(positives));
  m.user_ids = users.take();
  m.item_ids = items.take();
  return m;
}

RatingsMatrix load_ratings(const std::filesystem::path& path, double threshold) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return parse_ratings(in, threshold);
}

void write_ratings(std::ostream& out, const RatingsMatrix& m) {
  out << "user,item\n";
  for (auto [u, i] : m.positives()) {
    const std::string user = u < m.user_ids.size() ? m.user_ids[u] : std::to_string(u);
    const std::string item = i < m.item_ids.size() ? m.item_ids[i] : std::to_string(i);
    out << user << ',' << item << '\n';
  }
}

void write_id_map(std::ostream& out, const std::vector<std::string>& ids) {
  out << "orig_id,dense_id\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << i << '\n';
}

ReplaySplit split_users(const RatingsMatrix& m, std::size_t n_feature_users, std::uint64_t seed) {
  if (n_feature_users >= m.n_users()) {
    throw Error(Errc::too_few_users, std::to_string(m.n_users()) + " users cannot leave " +
                                         std::to_string(n_feature_users) +
                                         " for features and any for replay");
  }
  std::vector<std::size_t> order(m.n_users());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng::Engine gen = rng::stream(seed, rng::Purpose::split);
  // Fisher-Yates with our own index draws; std::shuffle is implementation-defined.
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng::uniform_index(gen, i)]);
  }
  ReplaySplit split;
  split.feature_users.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_feature_users));
  split.replay_users.assign(order.begin() + static_cast<std::ptrdiff_t>(n_feature_users), order.end());
  std::sort(split.feature_users.begin(), split.feature_users.end());
  std::sort(split.replay_users.begin(), split.replay_users.end());

  auto take = [&](const std::vector<std::size_t>& rows) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t item : m.row(rows[r])) pairs.emplace_back(r, item);
    }
    RatingsMatrix sub = RatingsMatrix::from_pairs(rows.size(), m.n_items(), std::move(pairs));
    sub.item_ids = m.item_ids;
    if (!m.user_ids.empty()) {
      for (std::size_t r : rows) sub.user_ids.push_back(m.user_ids[r]);
    }
    return sub;
  };
  split.H = take(split.feature_users);
  split.F = take(split.replay_users);
  return split;
}

FeatureSet extract_features(const RatingsMatrix& H, std::size_t d) {
  if (d == 0 || d > std::min(H.n_users(), H.n_items())) {
    throw Error(Errc::invalid_config, "feature dimension " + std::to_string(d) +
                                          " exceeds min(users, items) of the feature matrix");
  }
  const TruncatedSvd svd = truncated_svd(H.dense(), static_cast<Index>(d));
  FeatureSet out;
  out.singulars = svd.singulars;
  const double top = svd.singulars.size() > 0 ? svd.singulars[0] : 0.0;
  out.rank_deficient = !(svd.singulars[static_cast<Index>(d) - 1] >= 1e-10 * top) || top == 0.0;
  if (out.rank_deficient) {
    warn("RankDeficient: feature matrix has fewer than " + std::to_string(d) +
         " significant singular values; missing coordinates are zero");
  }
  const Matrix raw = svd.right * svd.singulars.asDiagonal();
  const double max_norm = raw.rowwise().norm().maxCoeff();
  out.items.reserve(H.n_items());
  for (std::size_t j = 0; j < H.n_items(); ++j) {
    Vector x = raw.row(static_cast<Index>(j)).transpose();
    if (max_norm > 0.0) x /= max_norm;
    out.items.push_back({j, std::move(x)});
  }
  return out;
}

void write_features(std::ostream& out, std::span<const ItemFeature> items) {
  const Index d = items.empty() ? 0 : items.front().x.size();
  out << "item_id";
  for (Index k = 1; k <= d; ++k) out << ",v" << k;
  out << '\n';
  for (const ItemFeature& item : items) {
    out << item.id;
    for (Index k = 0; k < item.x.size(); ++k) out << ',' << format_double(item.x[k]);
    out << '\n';
  }
}

CascadeOutcome replay_feedback(const RatingsMatrix& F, std::size_t user,
                               std::span<const ItemFeature> list) {
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (list[k].id >= F.n_items()) {
      throw Error(Errc::dimension_mismatch, "item " + std::to_string(list[k].id) + " out of range");
    }
    if (F.contains(user, list[k].id)) return CascadeOutcome::click_at(k + 1, list.size());
  }
  return CascadeOutcome::no_click(list.size());
}

std::vector<std::size_t> cumulative_clicks(std::span<const CascadeOutcome> log) {
  std::vector<std::size_t> out;
  out.reserve(log.size());
  std::size_t total = 0;
  for (const CascadeOutcome& o : log) {
    total += o.clicked() ? 1 : 0;
    out.push_back(total);
  }
  return out;
}

RatingsMatrix generate_clustered_matrix(const ClusteredMatrixSpec& spec, std::uint64_t seed,
                                        std::vector<std::size_t>* cluster_of_user) {
  if (spec.users == 0 || spec.items == 0 || spec.clusters == 0 ||
      spec.favored_items > spec.items) {
    throw Error(Errc::invalid_config, "clustered matrix spec out of range");
  }
  rng::Engine gen = rng::stream(seed, rng::Purpose::matrix);
  std::vector<std::vector<char>> favored(spec.clusters, std::vector<char>(spec.items, 0));
  std::vector<std::size_t> order(spec.items);
  for (auto& f : favored) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < spec.favored_items; ++i) {
      std::swap(order[i], order[i + rng::uniform_index(gen, spec.items - i)]);
      f[order[i]] = 1;
    }
  }
  std::vector<std::size_t> cluster(spec.users);
  for (std::size_t u = 0; u < spec.users; ++u) {
    cluster[u] = u < spec.clusters ? u : rng::uniform_index(gen, spec.clusters);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < spec.users; ++u) {
    for (std::size_t i = 0; i < spec.items; ++i) {
      const double p = favored[cluster[u]][i] ? spec.p_favored : spec.p_other;
      if (rng::bernoulli(gen, p)) pairs.emplace_back(u, i);
    }
  }
  RatingsMatrix m = RatingsMatrix::from_pairs(spec.users, spec.items, std::move(pairs));
  m.user_ids.reserve(spec.users);
  m.item_ids.reserve(spec.items);
  for (std::size_t u = 0; u < spec.users; ++u) m.user_ids.push_back("u" + std::to_string(u));
  for (std::size_t i = 0; i < spec.items; ++i) m.item_ids.push_back("i" + std::to_string(i));
  if (cluster_of_user) *cluster_of_user = std::move(cluster);
  return m;
}

}  // namespace clubcascade
