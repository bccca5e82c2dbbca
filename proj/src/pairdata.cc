#include "mvrank/pairdata.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mvrank/errors.h"

namespace mvrank {

void RankedView::Validate() const {
  if (features.rows() != static_cast<Eigen::Index>(keys.size()) ||
      ranks.size() != static_cast<Eigen::Index>(keys.size())) {
    std::ostringstream msg;
    msg << "view " << view_id << ": " << keys.size() << " keys, "
        << features.rows() << " feature rows, " << ranks.size() << " ranks";
    throw ShapeError(msg.str());
  }
  std::unordered_set<std::string> seen;
  for (const auto& k : keys) {
    if (!seen.insert(k).second) {
      throw InputError("view " + std::to_string(view_id) +
                       ": duplicate key '" + k + "'");
    }
  }
  for (Eigen::Index i = 0; i < ranks.size(); ++i) {
    if (!(ranks(i) > 0.0) || !std::isfinite(ranks(i))) {
      throw InputError("view " + std::to_string(view_id) + ": rank of '" +
                       keys[i] + "' is not a positive number");
    }
  }
  CheckFinite(features, "view " + std::to_string(view_id) + " features");
}

AlignedViews AlignViews(std::span<const RankedView> views) {
  if (views.size() < 2) {
    throw InputError("alignment needs at least two views");
  }
  for (const auto& v : views) {
    if (v.size() == 0) {
      throw InputError("view " + std::to_string(v.view_id) + " is empty");
    }
    v.Validate();
  }

  std::vector<std::unordered_map<std::string, int>> index(views.size());
  for (size_t v = 0; v < views.size(); ++v) {
    for (int i = 0; i < views[v].size(); ++i) index[v][views[v].keys[i]] = i;
  }
  std::vector<std::string> common;
  for (const auto& key : views.front().keys) {
    bool everywhere = true;
    for (size_t v = 1; v < views.size() && everywhere; ++v) {
      everywhere = index[v].contains(key);
    }
    if (everywhere) common.push_back(key);
  }
  if (common.empty()) {
    throw DataError("views share no sample keys");
  }

  AlignedViews out;
  const int n = static_cast<int>(common.size());
  out.mean_ranks = Vector::Zero(n);
  for (size_t v = 0; v < views.size(); ++v) {
    RankedView rv;
    rv.view_id = views[v].view_id;
    rv.keys = common;
    rv.features.resize(n, views[v].features.cols());
    rv.ranks.resize(n);
    for (int i = 0; i < n; ++i) {
      const int src = index[v].at(common[i]);
      rv.features.row(i) = views[v].features.row(src);
      rv.ranks(i) = views[v].ranks(src);
    }
    out.mean_ranks += rv.ranks;
    out.views.push_back(std::move(rv));
  }
  out.mean_ranks /= static_cast<double>(views.size());
  return out;
}

int RelevanceFromRanks(const Vector& ranks, int query, int item) {
  const int n = static_cast<int>(ranks.size());
  if (query < 0 || query >= n || item < 0 || item >= n) {
    throw InputError("pair index out of range");
  }
  if (query == item) {
    throw InputError("a sample cannot be paired with itself");
  }
  return ranks(item) <= ranks(query) ? 1 : 0;
}

namespace {

PairDataset TransformPairs(const AlignedViews& aligned,
                           const std::vector<std::pair<int, int>>& pairs,
                           LabelSource balance_on) {
  const int m = static_cast<int>(pairs.size());
  PairDataset out;
  out.balance_on = balance_on;
  out.joint_labels.resize(m);
  out.query_of_pair.resize(m);
  out.item_of_pair.resize(m);
  for (int r = 0; r < m; ++r) {
    const auto [q, i] = pairs[r];
    out.query_of_pair[r] = q;
    out.item_of_pair[r] = i;
    out.joint_labels[r] = RelevanceFromRanks(aligned.mean_ranks, q, i);
  }
  for (const auto& view : aligned.views) {
    Matrix x(m, view.features.cols());
    std::vector<int> y(m);
    for (int r = 0; r < m; ++r) {
      const auto [q, i] = pairs[r];
      x.row(r) = view.features.row(q) - view.features.row(i);
      y[r] = RelevanceFromRanks(view.ranks, q, i);
    }
    out.features.push_back(std::move(x));
    out.view_labels.push_back(std::move(y));
  }
  return out;
}

void CheckQueries(const AlignedViews& aligned, std::span<const int> queries) {
  if (queries.empty()) throw InputError("pairwise transform needs queries");
  if (aligned.size() < 2) {
    throw InputError("pairwise transform needs at least two samples");
  }
  for (int q : queries) {
    if (q < 0 || q >= aligned.size()) {
      throw InputError("query index " + std::to_string(q) + " out of range");
    }
  }
}

}  // namespace

PairDataset PairwiseTransform(const AlignedViews& aligned,
                              std::span<const int> queries,
                              LabelSource balance_on) {
  CheckQueries(aligned, queries);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(queries.size() * (aligned.size() - 1));
  for (int q : queries) {
    for (int i = 0; i < aligned.size(); ++i) {
      if (i != q) pairs.emplace_back(q, i);
    }
  }
  return TransformPairs(aligned, pairs, balance_on);
}

PairDataset PairwiseTransformSampled(const AlignedViews& aligned,
                                     std::span<const int> queries,
                                     std::optional<int> max_items_per_query,
                                     std::uint64_t seed,
                                     LabelSource balance_on) {
  if (!max_items_per_query.has_value()) {
    return PairwiseTransform(aligned, queries, balance_on);
  }
  CheckQueries(aligned, queries);
  if (*max_items_per_query < 1) {
    throw InputError("per-query pair cap must be >= 1");
  }
  Rng rng(seed);
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> others;
  for (int q : queries) {
    others.clear();
    for (int i = 0; i < aligned.size(); ++i) {
      if (i != q) others.push_back(i);
    }
    std::shuffle(others.begin(), others.end(), rng);
    const size_t keep =
        std::min(others.size(), static_cast<size_t>(*max_items_per_query));
    std::sort(others.begin(), others.begin() + keep);
    for (size_t j = 0; j < keep; ++j) pairs.emplace_back(q, others[j]);
  }
  return TransformPairs(aligned, pairs, balance_on);
}

PairDataset BalanceClasses(const PairDataset& pairs, std::uint64_t seed) {
  PairDataset out = pairs;
  const std::vector<int>& labels = out.primary_labels();
  std::vector<int> ones, zeros;
  for (int r = 0; r < out.size(); ++r) {
    (labels[r] == 1 ? ones : zeros).push_back(r);
  }
  const long diff = static_cast<long>(ones.size()) - static_cast<long>(zeros.size());
  if (std::abs(diff) <= 1) return out;

  std::vector<int>& majority = diff > 0 ? ones : zeros;
  const size_t to_flip = static_cast<size_t>(std::abs(diff) / 2);
  Rng rng(seed);
  std::shuffle(majority.begin(), majority.end(), rng);
  std::vector<int> flip(majority.begin(), majority.begin() + to_flip);
  std::sort(flip.begin(), flip.end());

  for (int r : flip) {
    for (auto& x : out.features) x.row(r) *= -1.0;
    for (auto& y : out.view_labels) y[r] = 1 - y[r];
    out.joint_labels[r] = 1 - out.joint_labels[r];
    std::swap(out.query_of_pair[r], out.item_of_pair[r]);
  }
  return out;
}

PairDataset SelectPairs(const PairDataset& pairs, std::span<const int> rows) {
  PairDataset out;
  out.balance_on = pairs.balance_on;
  const int m = static_cast<int>(rows.size());
  for (const auto& x : pairs.features) {
    Matrix sub(m, x.cols());
    for (int r = 0; r < m; ++r) sub.row(r) = x.row(rows[r]);
    out.features.push_back(std::move(sub));
  }
  for (const auto& y : pairs.view_labels) {
    std::vector<int> sub(m);
    for (int r = 0; r < m; ++r) sub[r] = y[rows[r]];
    out.view_labels.push_back(std::move(sub));
  }
  out.joint_labels.resize(m);
  out.query_of_pair.resize(m);
  out.item_of_pair.resize(m);
  for (int r = 0; r < m; ++r) {
    out.joint_labels[r] = pairs.joint_labels[rows[r]];
    out.query_of_pair[r] = pairs.query_of_pair[rows[r]];
    out.item_of_pair[r] = pairs.item_of_pair[rows[r]];
  }
  return out;
}

AlignedViews SelectSamples(const AlignedViews& aligned,
                           std::span<const int> indices) {
  AlignedViews out;
  const int n = static_cast<int>(indices.size());
  out.mean_ranks.resize(n);
  for (int i = 0; i < n; ++i) out.mean_ranks(i) = aligned.mean_ranks(indices[i]);
  for (const auto& v : aligned.views) {
    RankedView rv;
    rv.view_id = v.view_id;
    rv.features.resize(n, v.features.cols());
    rv.ranks.resize(n);
    for (int i = 0; i < n; ++i) {
      rv.keys.push_back(v.keys[indices[i]]);
      rv.features.row(i) = v.features.row(indices[i]);
      rv.ranks(i) = v.ranks(indices[i]);
    }
    out.views.push_back(std::move(rv));
  }
  return out;
}

}  // namespace mvrank
