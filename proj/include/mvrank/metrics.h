// Ranking and pair-classification metrics.

#ifndef MVRANK_METRICS_H_
#define MVRANK_METRICS_H_

#include <span>
#include <utility>
#include <vector>

namespace mvrank {

// Tau-b (tie corrected) between two score lists over the same items.
// O(n log n) via merge-sort inversion counting.
double KendallTau(std::span<const double> a, std::span<const double> b);

struct QueryGroup {
  std::vector<double> scores;  // higher ranks first
  std::vector<int> relevance;  // 0/1
};

struct MapResult {
  double map = 0.0;
  int evaluated_queries = 0;
  int excluded_queries = 0;  // queries without any relevant sample
};

// Mean over queries of AP@k. Items are ordered by descending score with
// ties kept in input order. AP@k averages precision at every relevant
// position <= k; queries with no relevant item are excluded.
MapResult MapAtK(std::span<const QueryGroup> groups, int k);

// Fraction of items with (p >= threshold) == (y == 1).
double Accuracy(std::span<const double> p, std::span<const int> y,
                double threshold = 0.5);

enum class CurveKind { kPr11, kRoc };

struct CurveSeries {
  CurveKind kind = CurveKind::kRoc;
  // ROC: (fpr, tpr) from (0,0) to (1,1). PR11: (recall, precision) at
  // recall 0.0, 0.1, ..., 1.0.
  std::vector<std::pair<double, double>> points;
};

CurveSeries Curve(std::span<const double> p, std::span<const int> y,
                  CurveKind kind);

// Trapezoidal area under a ROC series.
double AreaUnderCurve(const CurveSeries& roc);

}  // namespace mvrank

#endif  // MVRANK_METRICS_H_
