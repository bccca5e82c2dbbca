#include "mvrank/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "mvrank/errors.h"

namespace mvrank {
namespace {

// Pairs tied within runs of equal values, sum of t(t-1)/2.
template <typename Equal>
std::int64_t TiedPairs(const std::vector<int>& order, Equal eq) {
  std::int64_t ties = 0;
  std::int64_t run = 1;
  for (size_t i = 1; i < order.size(); ++i) {
    if (eq(order[i - 1], order[i])) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties + run * (run - 1) / 2;
}

// Stable merge sort of `idx` by key b, returning the number of inversions.
std::int64_t SortCountingSwaps(std::vector<int>& idx, std::span<const double> b) {
  std::vector<int> buf(idx.size());
  std::int64_t swaps = 0;
  for (size_t width = 1; width < idx.size(); width *= 2) {
    for (size_t lo = 0; lo < idx.size(); lo += 2 * width) {
      const size_t mid = std::min(lo + width, idx.size());
      const size_t hi = std::min(lo + 2 * width, idx.size());
      size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (b[idx[j]] < b[idx[i]]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = idx[j++];
        } else {
          buf[k++] = idx[i++];
        }
      }
      while (i < mid) buf[k++] = idx[i++];
      while (j < hi) buf[k++] = idx[j++];
    }
    idx.swap(buf);
  }
  return swaps;
}

void CheckLengths(size_t a, size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch (" +
                     std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

double KendallTau(std::span<const double> a, std::span<const double> b) {
  CheckLengths(a.size(), b.size(), "kendall tau");
  if (a.size() < 2) throw InputError("kendall tau needs at least two items");
  const auto n = static_cast<std::int64_t>(a.size());
  const std::int64_t total = n * (n - 1) / 2;

  std::vector<int> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int x, int y) {
    return a[x] < a[y] || (a[x] == a[y] && b[x] < b[y]);
  });
  const std::int64_t ties_a =
      TiedPairs(idx, [&](int x, int y) { return a[x] == a[y]; });
  const std::int64_t ties_ab = TiedPairs(
      idx, [&](int x, int y) { return a[x] == a[y] && b[x] == b[y]; });
  const std::int64_t discordant = SortCountingSwaps(idx, b);
  const std::int64_t ties_b =
      TiedPairs(idx, [&](int x, int y) { return b[x] == b[y]; });

  const double denom = std::sqrt(static_cast<double>(total - ties_a) *
                                 static_cast<double>(total - ties_b));
  if (denom == 0.0) return 0.0;
  const std::int64_t concordant_minus_discordant =
      total - ties_a - ties_b + ties_ab - 2 * discordant;
  return static_cast<double>(concordant_minus_discordant) / denom;
}

MapResult MapAtK(std::span<const QueryGroup> groups, int k) {
  if (k < 1) throw InputError("MAP cutoff k must be >= 1");
  MapResult out;
  double sum = 0.0;
  for (const auto& g : groups) {
    CheckLengths(g.scores.size(), g.relevance.size(), "MAP query group");
    if (g.scores.empty()) throw InputError("MAP query group is empty");
    if (std::none_of(g.relevance.begin(), g.relevance.end(),
                     [](int r) { return r == 1; })) {
      ++out.excluded_queries;
      continue;
    }
    std::vector<int> order(g.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return g.scores[x] > g.scores[y];
    });
    const size_t depth = std::min(order.size(), static_cast<size_t>(k));
    double precision_sum = 0.0;
    int hits = 0;
    for (size_t pos = 0; pos < depth; ++pos) {
      if (g.relevance[order[pos]] == 1) {
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
      }
    }
    sum += hits > 0 ? precision_sum / hits : 0.0;
    ++out.evaluated_queries;
  }
  out.map = out.evaluated_queries > 0 ? sum / out.evaluated_queries : 0.0;
  return out;
}

double Accuracy(std::span<const double> p, std::span<const int> y,
                double threshold) {
  CheckLengths(p.size(), y.size(), "accuracy");
  if (p.empty()) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const int predicted = p[i] >= threshold ? 1 : 0;
    if (predicted == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(p.size());
}

CurveSeries Curve(std::span<const double> p, std::span<const int> y,
                  CurveKind kind) {
  CheckLengths(p.size(), y.size(), "curve");
  const auto positives = std::count(y.begin(), y.end(), 1);
  const auto negatives = static_cast<long>(y.size()) - positives;
  if (positives == 0 || (kind == CurveKind::kRoc && negatives == 0)) {
    throw InputError(kind == CurveKind::kRoc
                         ? "ROC curve needs both classes present"
                         : "precision-recall curve needs a positive label");
  }

  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p[a] > p[b]; });

  // Operating points after each block of equal scores.
  std::vector<std::pair<long, long>> counts;  // (true pos, false pos)
  long tp = 0, fp = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    if (y[order[i]] == 1) ++tp; else ++fp;
    if (i + 1 == order.size() || p[order[i + 1]] != p[order[i]]) {
      counts.emplace_back(tp, fp);
    }
  }

  CurveSeries out;
  out.kind = kind;
  if (kind == CurveKind::kRoc) {
    out.points.emplace_back(0.0, 0.0);
    for (const auto& [t, f] : counts) {
      out.points.emplace_back(static_cast<double>(f) / negatives,
                              static_cast<double>(t) / positives);
    }
    return out;
  }

  std::vector<std::pair<double, double>> pr;  // (recall, precision)
  for (const auto& [t, f] : counts) {
    pr.emplace_back(static_cast<double>(t) / positives,
                    static_cast<double>(t) / static_cast<double>(t + f));
  }
  for (int level = 0; level <= 10; ++level) {
    const double recall = level / 10.0;
    double best = 0.0;
    for (const auto& [r, prec] : pr) {
      if (r >= recall - 1e-12) best = std::max(best, prec);
    }
    out.points.emplace_back(recall, best);
  }
  return out;
}

double AreaUnderCurve(const CurveSeries& roc) {
  if (roc.kind != CurveKind::kRoc) {
    throw InputError("area under curve is defined for ROC series");
  }
  double area = 0.0;
  for (size_t i = 1; i < roc.points.size(); ++i) {
    const auto [x0, y0] = roc.points[i - 1];
    const auto [x1, y1] = roc.points[i];
    area += (x1 - x0) * (y0 + y1) / 2.0;
  }
  return area;
}

}  // namespace mvrank
