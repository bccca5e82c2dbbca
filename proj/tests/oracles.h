// Exhaustive reference implementations shared by the unit tests and the
// acceptance binary. Written independently of the library code.

#ifndef MVRANK_TESTS_ORACLES_H_
#define MVRANK_TESTS_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <vector>

namespace mvrank::oracle {

// Tau-b from explicit pair counts.
inline double KendallTauB(const std::vector<double>& a,
                          const std::vector<double>& b) {
  const size_t n = a.size();
  std::int64_t concordant = 0, discordant = 0, only_a = 0, only_b = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ++only_a;
      } else if (db == 0.0) {
        ++only_b;
      } else if ((da > 0.0) == (db > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  // Pairs untied in a are the ones not tied in a: concordant, discordant and
  // the pairs tied only in b.
  const double untied_a = static_cast<double>(concordant + discordant + only_b);
  const double untied_b = static_cast<double>(concordant + discordant + only_a);
  const double denom = std::sqrt(untied_a * untied_b);
  if (denom == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / denom;
}

// Average precision at cutoff k: each item's position is one plus the number
// of items ahead of it (higher score, or equal score and earlier index).
// Returns a negative value when the query has no relevant item.
inline double AveragePrecision(const std::vector<double>& scores,
                               const std::vector<int>& relevance, int k) {
  const size_t n = scores.size();
  std::vector<size_t> position(n);
  for (size_t i = 0; i < n; ++i) {
    size_t ahead = 0;
    for (size_t j = 0; j < n; ++j) {
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++ahead;
    }
    position[i] = ahead + 1;
  }
  bool any = false;
  for (int r : relevance) any = any || r == 1;
  if (!any) return -1.0;
  double sum = 0.0;
  int hits = 0;
  for (size_t pos = 1; pos <= n && pos <= static_cast<size_t>(k); ++pos) {
    for (size_t i = 0; i < n; ++i) {
      if (position[i] != pos || relevance[i] != 1) continue;
      int relevant_up_to = 0;
      for (size_t j = 0; j < n; ++j) {
        if (position[j] <= pos && relevance[j] == 1) ++relevant_up_to;
      }
      ++hits;
      sum += static_cast<double>(relevant_up_to) / static_cast<double>(pos);
    }
  }
  return hits > 0 ? sum / hits : 0.0;
}

// Mann-Whitney estimate of P(score of a positive > score of a negative),
// ties counting one half.
inline double MannWhitneyAuc(const std::vector<double>& p,
                             const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (y[i] != 1) continue;
    for (size_t j = 0; j < p.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (p[i] > p[j]) {
        wins += 1.0;
      } else if (p[i] == p[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

}  // namespace mvrank::oracle

#endif  // MVRANK_TESTS_ORACLES_H_
