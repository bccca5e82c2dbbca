// Train/test preparation, pair-prediction files and evaluation summaries
// shared by the CLI, the acceptance suite and the Python module.

#ifndef MVRANK_EXPERIMENT_H_
#define MVRANK_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvrank/dataset.h"
#include "mvrank/metrics.h"
#include "mvrank/models.h"
#include "mvrank/pairdata.h"

namespace mvrank {

struct SplitConfig {
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  std::optional<int> pairs_per_query;  // cap for training pairs
};

struct PreparedData {
  AlignedViews train;  // standardized with training statistics
  AlignedViews test;
  std::vector<Standardization> stats;  // per view
  PairDataset train_pairs;  // every training sample as query, balanced
  PairDataset test_pairs;   // every test sample as query, all partners
};

// Aligns the views, splits samples by a seeded permutation, standardizes
// each view with the training statistics and builds the pair sets.
PreparedData PrepareData(std::span<const RankedView> views,
                         const SplitConfig& split);

struct PairPredictionRow {
  std::string query;
  std::string item;
  double query_rank = 0.0;  // mean rank across views
  double item_rank = 0.0;
  int label = 0;            // 1 when item ranks at least as well as query
  double probability = 0.0;
};

std::vector<PairPredictionRow> PredictionRows(const AlignedViews& samples,
                                              const PairDataset& pairs,
                                              const Vector& probabilities);

void WritePredictions(std::span<const PairPredictionRow> rows,
                      const std::filesystem::path& path);
std::vector<PairPredictionRow> ReadPredictions(const std::filesystem::path& path);

// Per-sample score from pair probabilities: the mean over every pair the
// sample takes part in of the probability that it is the better one.
struct SampleScores {
  std::vector<std::string> keys;
  std::vector<double> scores;      // higher is better
  std::vector<double> mean_ranks;  // lower is better
};
SampleScores AggregateSampleScores(std::span<const PairPredictionRow> rows);

struct EvaluationMetrics {
  double kendall_tau = 0.0;
  double accuracy = 0.0;
  double map_at_100 = 0.0;
  std::optional<double> roc_auc;
  int n_pairs = 0;
  int excluded_queries = 0;
  std::optional<CurveSeries> pr11;
  std::optional<CurveSeries> roc;
};

EvaluationMetrics Evaluate(std::span<const PairPredictionRow> rows);

// {"kendall_tau", "accuracy", "map_at_100", "roc_auc", "n_pairs",
//  "excluded_queries"}
std::string MetricsJson(const EvaluationMetrics& m);
void WriteMetrics(const EvaluationMetrics& m, const std::filesystem::path& dir);

void WriteTrainingLog(std::span<const EpochLog> log,
                      const std::filesystem::path& path);

// Logistic regression on the concatenated raw pair features of all views.
struct ConcatBaseline {
  ScoringFunction scorer;
  Vector Predict(const PairDataset& pairs) const;
};
ConcatBaseline FitConcatBaseline(const PairDataset& pairs, double learning_rate,
                                 int epochs);

// All view features of a pair set as prediction input.
std::vector<std::optional<Matrix>> AllViews(const PairDataset& pairs);

}  // namespace mvrank

#endif  // MVRANK_EXPERIMENT_H_
