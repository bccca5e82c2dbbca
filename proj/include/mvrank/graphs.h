// Laplacian and scatter matrices that encode centering and class structure
// inside the trace-ratio objectives.

#ifndef MVRANK_GRAPHS_H_
#define MVRANK_GRAPHS_H_

#include <span>
#include <vector>

#include "mvrank/netcore.h"

namespace mvrank {

struct ClassPartition {
  struct Class {
    int id = 0;
    int count = 0;
    Vector indicator;  // 0/1, length N
  };
  std::vector<int> labels;
  std::vector<Class> classes;  // ordered by class id

  int size() const { return static_cast<int>(labels.size()); }
};

ClassPartition MakePartition(std::span<const int> labels);

enum class LaplacianKind { kCentering, kBetweenClass, kWithinClass };

// I - (1/N) e e^T.
Matrix CenteringLaplacian(int n);

// 2 * sum_p sum_q (e_p e_p^T / N_p^2 - e_p e_q^T / (N_p N_q)).
Matrix BetweenClassLaplacian(const ClassPartition& part);

// I - sum_c e_c e_c^T / N_c.
Matrix WithinClassLaplacian(const ClassPartition& part);

// (1/N) * Zc_i * Zc_j^T where Zc is Z with each row (feature) centered.
// Samples are columns here: Z_i is d_i x N and Z_j is d_j x N.
Matrix CrossViewCovariance(const Matrix& z_i, const Matrix& z_j, int n);

}  // namespace mvrank

#endif  // MVRANK_GRAPHS_H_
