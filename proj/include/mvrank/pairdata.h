// Per-view ranked sample lists to aligned pairwise training data.

#ifndef MVRANK_PAIRDATA_H_
#define MVRANK_PAIRDATA_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvrank/netcore.h"

namespace mvrank {

// Ranking positions: 1 is best; ties are allowed.
struct RankedView {
  int view_id = 0;
  std::vector<std::string> keys;
  Matrix features;  // N x d_v
  Vector ranks;     // N

  int size() const { return static_cast<int>(keys.size()); }
  void Validate() const;
};

struct AlignedViews {
  std::vector<RankedView> views;  // identical key order
  Vector mean_ranks;              // average of the views' rank vectors

  int size() const { return views.empty() ? 0 : views.front().size(); }
  const std::vector<std::string>& keys() const { return views.front().keys; }
};

// Keeps the keys present in every view, in the first view's order.
AlignedViews AlignViews(std::span<const RankedView> views);

// 1 when sample i ranks at least as well as the query (r_i <= r_q).
int RelevanceFromRanks(const Vector& ranks, int query, int item);

enum class LabelSource { kPerView, kJoint };

struct PairDataset {
  std::vector<Matrix> features;            // per view, M x d_v
  std::vector<std::vector<int>> view_labels;  // per view, M
  std::vector<int> joint_labels;           // M, from the mean ranks
  std::vector<int> query_of_pair;          // M, sample index of the query
  std::vector<int> item_of_pair;           // M, sample index of the other
  LabelSource balance_on = LabelSource::kJoint;

  int size() const { return static_cast<int>(joint_labels.size()); }
  int view_count() const { return static_cast<int>(features.size()); }
  // The label vector that class balancing equalizes.
  const std::vector<int>& primary_labels() const {
    return balance_on == LabelSource::kJoint ? joint_labels
                                             : view_labels.front();
  }
};

// Emits x_q - x_i for each query q and every other sample i, with per-view
// labels from each view's ranks and joint labels from the mean ranks.
// `balance_on` picks which labels BalanceClasses equalizes.
PairDataset PairwiseTransform(const AlignedViews& aligned,
                              std::span<const int> queries,
                              LabelSource balance_on = LabelSource::kJoint);

// Same transform restricted to at most `max_items_per_query` seeded-random
// partners per query (all partners when unset).
PairDataset PairwiseTransformSampled(const AlignedViews& aligned,
                                     std::span<const int> queries,
                                     std::optional<int> max_items_per_query,
                                     std::uint64_t seed,
                                     LabelSource balance_on = LabelSource::kJoint);

// Negates a seeded random subset of majority-class pairs (features in every
// view, all labels flipped, query/item swapped) until the primary labels'
// class counts differ by at most one.
PairDataset BalanceClasses(const PairDataset& pairs, std::uint64_t seed);

// Rows `rows` of every per-pair field.
PairDataset SelectPairs(const PairDataset& pairs, std::span<const int> rows);

// Subset of aligned samples by index, keeping the mean ranks.
AlignedViews SelectSamples(const AlignedViews& aligned,
                           std::span<const int> indices);

}  // namespace mvrank

#endif  // MVRANK_PAIRDATA_H_
