// Trace-ratio multi-view embedding.
//
// Throughout this header a view representation Z_v is laid out with one
// sample per column (d_v x N), matching the scatter expressions
// W_i^T Z_i L Z_j^T W_j. Network outputs are N x d_v and are transposed at
// the call site.

#ifndef MVRANK_SUBSPACE_H_
#define MVRANK_SUBSPACE_H_

#include <optional>
#include <span>
#include <vector>

#include "mvrank/netcore.h"

namespace mvrank {

struct EmbeddingProjection {
  std::vector<Matrix> view_weights;  // d_v x k each
  Vector eigenvalues;                // k
  int dim = 0;                       // k

  int view_count() const { return static_cast<int>(view_weights.size()); }
  // Row blocks W_1 ... W_V stacked into (sum d_v) x k.
  Matrix Stacked() const;
};

// Which blocks of the numerator enter the objective. Correlation-style
// (CCA) objectives sum over view pairs i != j only; discriminant (MDA)
// objectives sum over all i, j including i == j.
enum class NumeratorBlocks { kCrossViewOnly, kAllPairs };

struct TraceRatioState {
  double f = 0.0;
  double g = 0.0;
  double ratio = 0.0;
};

// f = Tr(sum_{i,j} W_i^T Z_i L_num Z_j^T W_j) over the selected blocks,
// g = Tr(sum_i W_i^T Z_i L_den Z_i^T W_i). Throws NumericalError when
// g <= 1e-12.
TraceRatioState TraceRatioObjective(std::span<const Matrix> z,
                                    const EmbeddingProjection& proj,
                                    const Matrix& l_num, const Matrix& l_den,
                                    NumeratorBlocks blocks);

// d(f/g)/dZ_v for every view, with W held fixed. Each Z_v appears on both
// sides of its trace terms, so the Laplacians enter as (L + L^T).
std::vector<Matrix> TraceRatioGradZ(std::span<const Matrix> z,
                                    const EmbeddingProjection& proj,
                                    const Matrix& l_num, const Matrix& l_den,
                                    NumeratorBlocks blocks);

// Blocked numerator A (blocks Z_i L_num Z_j^T over the selected pairs) and
// block-diagonal denominator B (blocks Z_i L_den Z_i^T).
struct ScatterPair {
  Matrix numerator;
  Matrix denominator;
};
ScatterPair BuildScatter(std::span<const Matrix> z, const Matrix& l_num,
                         const Matrix& l_den, NumeratorBlocks blocks);

// Solves A W = lambda (B + eps I) W for the top-k pairs and splits W back
// into per-view row blocks. Columns of the stacked W are rescaled to unit
// Euclidean norm. Without `eps`, 1e-6 * mean(diag(B)) is used.
EmbeddingProjection SolveProjection(std::span<const Matrix> z,
                                    const Matrix& l_num, const Matrix& l_den,
                                    int k, NumeratorBlocks blocks,
                                    std::optional<double> eps = std::nullopt);

}  // namespace mvrank

#endif  // MVRANK_SUBSPACE_H_
