#include "mvrank/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mvrank/errors.h"

namespace mvrank {
namespace {

std::string Num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Matrix ConcatFeatures(const PairDataset& pairs) {
  Eigen::Index cols = 0;
  for (const auto& x : pairs.features) cols += x.cols();
  Matrix out(pairs.size(), cols);
  Eigen::Index c = 0;
  for (const auto& x : pairs.features) {
    out.middleCols(c, x.cols()) = x;
    c += x.cols();
  }
  return out;
}

double ParseField(const std::string& s, const std::string& column, size_t row) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("predictions row " + std::to_string(row) + ", column '" +
                     column + "': bad number '" + s + "'");
  }
  return v;
}

}  // namespace

PreparedData PrepareData(std::span<const RankedView> views,
                         const SplitConfig& split) {
  if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0)) {
    throw InputError("test fraction must lie in (0, 1)");
  }
  const AlignedViews aligned = AlignViews(views);
  const int n = aligned.size();
  const int n_test = static_cast<int>(std::lround(split.test_fraction * n));
  if (n_test < 2 || n - n_test < 2) {
    throw DataError("split leaves fewer than two samples on one side (N = " +
                    std::to_string(n) + ")");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(split.seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> test_idx(perm.begin(), perm.begin() + n_test);
  std::vector<int> train_idx(perm.begin() + n_test, perm.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  PreparedData out;
  out.train = SelectSamples(aligned, train_idx);
  out.test = SelectSamples(aligned, test_idx);
  for (size_t v = 0; v < aligned.views.size(); ++v) {
    StandardizedMatrix s = Standardize(out.train.views[v].features);
    out.train.views[v].features = std::move(s.values);
    out.test.views[v].features =
        ApplyStandardization(out.test.views[v].features, s.stats);
    out.stats.push_back(std::move(s.stats));
  }

  std::vector<int> train_queries(out.train.size());
  std::iota(train_queries.begin(), train_queries.end(), 0);
  const PairDataset raw = PairwiseTransformSampled(
      out.train, train_queries, split.pairs_per_query, split.seed + 1);
  out.train_pairs = BalanceClasses(raw, split.seed + 2);

  std::vector<int> test_queries(out.test.size());
  std::iota(test_queries.begin(), test_queries.end(), 0);
  out.test_pairs = PairwiseTransform(out.test, test_queries);
  return out;
}

std::vector<PairPredictionRow> PredictionRows(const AlignedViews& samples,
                                              const PairDataset& pairs,
                                              const Vector& probabilities) {
  if (probabilities.size() != pairs.size()) {
    throw ShapeError("probability count does not match pair count");
  }
  std::vector<PairPredictionRow> rows(pairs.size());
  const auto& keys = samples.keys();
  for (int r = 0; r < pairs.size(); ++r) {
    const int q = pairs.query_of_pair[r];
    const int i = pairs.item_of_pair[r];
    rows[r].query = keys[q];
    rows[r].item = keys[i];
    rows[r].query_rank = samples.mean_ranks(q);
    rows[r].item_rank = samples.mean_ranks(i);
    rows[r].label = pairs.joint_labels[r];
    rows[r].probability = probabilities(r);
  }
  return rows;
}

void WritePredictions(std::span<const PairPredictionRow> rows,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "query,item,query_rank,item_rank,label,probability\n";
  for (const auto& r : rows) {
    out << r.query << "," << r.item << "," << Num(r.query_rank) << ","
        << Num(r.item_rank) << "," << r.label << "," << Num(r.probability)
        << "\n";
  }
}

std::vector<PairPredictionRow> ReadPredictions(const std::filesystem::path& path) {
  const CsvTable t = ReadCsv(path);
  const std::vector<std::string> want = {"query", "item", "query_rank",
                                         "item_rank", "label", "probability"};
  std::vector<int> col(want.size(), -1);
  for (size_t w = 0; w < want.size(); ++w) {
    for (size_t c = 0; c < t.header.size(); ++c) {
      if (t.header[c] == want[w]) col[w] = static_cast<int>(c);
    }
    if (col[w] < 0) {
      throw ParseError(path.string() + ": missing column '" + want[w] + "'");
    }
  }
  std::vector<PairPredictionRow> rows;
  rows.reserve(t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    PairPredictionRow row;
    row.query = f[col[0]];
    row.item = f[col[1]];
    row.query_rank = ParseField(f[col[2]], want[2], r + 1);
    row.item_rank = ParseField(f[col[3]], want[3], r + 1);
    const double label = ParseField(f[col[4]], want[4], r + 1);
    if (label != 0.0 && label != 1.0) {
      throw ParseError(path.string() + " row " + std::to_string(r + 1) +
                       ": label must be 0 or 1");
    }
    row.label = static_cast<int>(label);
    row.probability = ParseField(f[col[5]], want[5], r + 1);
    rows.push_back(std::move(row));
  }
  return rows;
}

SampleScores AggregateSampleScores(std::span<const PairPredictionRow> rows) {
  SampleScores out;
  std::unordered_map<std::string, size_t> slot;
  std::vector<double> wins, counts;
  auto touch = [&](const std::string& key, double rank) -> size_t {
    auto [it, inserted] = slot.emplace(key, out.keys.size());
    if (inserted) {
      out.keys.push_back(key);
      out.mean_ranks.push_back(rank);
      wins.push_back(0.0);
      counts.push_back(0.0);
    }
    return it->second;
  };
  for (const auto& r : rows) {
    const size_t q = touch(r.query, r.query_rank);
    const size_t i = touch(r.item, r.item_rank);
    wins[i] += r.probability;
    wins[q] += 1.0 - r.probability;
    counts[i] += 1.0;
    counts[q] += 1.0;
  }
  out.scores.resize(out.keys.size());
  for (size_t s = 0; s < out.keys.size(); ++s) out.scores[s] = wins[s] / counts[s];
  return out;
}

EvaluationMetrics Evaluate(std::span<const PairPredictionRow> rows) {
  if (rows.empty()) throw InputError("no predictions to evaluate");
  EvaluationMetrics m;
  m.n_pairs = static_cast<int>(rows.size());
  std::vector<double> p;
  std::vector<int> y;
  for (const auto& r : rows) {
    p.push_back(r.probability);
    y.push_back(r.label);
  }
  m.accuracy = Accuracy(p, y);

  std::vector<QueryGroup> groups;
  std::unordered_map<std::string, size_t> group_of;
  for (const auto& r : rows) {
    auto [it, inserted] = group_of.emplace(r.query, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].scores.push_back(r.probability);
    groups[it->second].relevance.push_back(r.label);
  }
  const MapResult map = MapAtK(groups, 100);
  m.map_at_100 = map.map;
  m.excluded_queries = map.excluded_queries;

  const bool has_pos = std::count(y.begin(), y.end(), 1) > 0;
  const bool has_neg = std::count(y.begin(), y.end(), 0) > 0;
  if (has_pos) m.pr11 = Curve(p, y, CurveKind::kPr11);
  if (has_pos && has_neg) {
    m.roc = Curve(p, y, CurveKind::kRoc);
    m.roc_auc = AreaUnderCurve(*m.roc);
  }

  const SampleScores s = AggregateSampleScores(rows);
  if (s.keys.size() >= 2) {
    std::vector<double> goodness(s.mean_ranks.size());
    for (size_t i = 0; i < goodness.size(); ++i) goodness[i] = -s.mean_ranks[i];
    m.kendall_tau = KendallTau(s.scores, goodness);
  }
  return m;
}

std::string MetricsJson(const EvaluationMetrics& m) {
  nlohmann::ordered_json j;
  j["kendall_tau"] = m.kendall_tau;
  j["accuracy"] = m.accuracy;
  j["map_at_100"] = m.map_at_100;
  j["roc_auc"] = m.roc_auc.has_value() ? nlohmann::ordered_json(*m.roc_auc)
                                       : nlohmann::ordered_json(nullptr);
  j["n_pairs"] = m.n_pairs;
  j["excluded_queries"] = m.excluded_queries;
  return j.dump(2) + "\n";
}

void WriteMetrics(const EvaluationMetrics& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.json");
    if (!out) throw Error("cannot write metrics.json in " + dir.string());
    out << MetricsJson(m);
  }
  if (m.pr11.has_value()) {
    std::ofstream out(dir / "pr11.csv");
    out << "recall,precision\n";
    for (const auto& [r, p] : m.pr11->points) out << Num(r) << "," << Num(p) << "\n";
  }
  if (m.roc.has_value()) {
    std::ofstream out(dir / "roc.csv");
    out << "fpr,tpr\n";
    for (const auto& [f, t] : m.roc->points) out << Num(f) << "," << Num(t) << "\n";
  }
}

void WriteTrainingLog(std::span<const EpochLog> log,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,reference_ratio,autoencoder,view_rank,fused_rank,"
         "encoder_objective,skipped_batches\n";
  for (const auto& e : log) {
    for (double v : {e.reference_ratio, e.autoencoder, e.view_rank,
                     e.fused_rank, e.encoder_objective}) {
      if (!std::isfinite(v)) {
        throw TrainingError("non-finite value in training log at epoch " +
                            std::to_string(e.epoch));
      }
    }
    out << e.epoch << "," << Num(e.reference_ratio) << "," << Num(e.autoencoder)
        << "," << Num(e.view_rank) << "," << Num(e.fused_rank) << ","
        << Num(e.encoder_objective) << "," << e.skipped_batches << "\n";
  }
}

Vector ConcatBaseline::Predict(const PairDataset& pairs) const {
  const Matrix x = ConcatFeatures(pairs);
  if (x.cols() != scorer.weights.size()) {
    throw ShapeError("baseline expects " + std::to_string(scorer.weights.size()) +
                     " features, got " + std::to_string(x.cols()));
  }
  Vector p(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    p(r) = RankProbability(scorer.Score(x.row(r).transpose()));
  }
  return p;
}

ConcatBaseline FitConcatBaseline(const PairDataset& pairs, double learning_rate,
                                 int epochs) {
  ConcatBaseline b;
  b.scorer = FitScoring(ConcatFeatures(pairs), pairs.joint_labels,
                        learning_rate, epochs);
  return b;
}

std::vector<std::optional<Matrix>> AllViews(const PairDataset& pairs) {
  std::vector<std::optional<Matrix>> out;
  for (const auto& x : pairs.features) out.emplace_back(x);
  return out;
}

}  // namespace mvrank
