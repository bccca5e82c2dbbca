#include "mvrank/subspace.h"

#include <sstream>
#include <string>

#include "mvrank/errors.h"

namespace mvrank {
namespace {

constexpr double kMinDenominator = 1e-12;

void CheckOperands(std::span<const Matrix> z, const Matrix& l_num,
                   const Matrix& l_den, const EmbeddingProjection* proj) {
  if (z.empty()) throw InputError("trace ratio needs at least one view");
  const Eigen::Index n = z.front().cols();
  for (size_t v = 0; v < z.size(); ++v) {
    if (z[v].cols() != n) {
      std::ostringstream msg;
      msg << "view " << v << " has " << z[v].cols() << " samples, view 0 has "
          << n;
      throw ShapeError(msg.str());
    }
  }
  for (const Matrix* l : {&l_num, &l_den}) {
    if (l->rows() != n || l->cols() != n) {
      std::ostringstream msg;
      msg << "Laplacian is " << l->rows() << "x" << l->cols()
          << ", expected " << n << "x" << n;
      throw ShapeError(msg.str());
    }
  }
  if (proj == nullptr) return;
  if (proj->view_weights.size() != z.size()) {
    throw ShapeError("projection has " +
                     std::to_string(proj->view_weights.size()) +
                     " views, data has " + std::to_string(z.size()));
  }
  for (size_t v = 0; v < z.size(); ++v) {
    const Matrix& w = proj->view_weights[v];
    if (w.rows() != z[v].rows() || w.cols() != proj->dim) {
      std::ostringstream msg;
      msg << "projection for view " << v << " is " << w.rows() << "x"
          << w.cols() << ", expected " << z[v].rows() << "x" << proj->dim;
      throw ShapeError(msg.str());
    }
  }
}

// Projected views P_v = W_v^T Z_v (k x N).
std::vector<Matrix> Project(std::span<const Matrix> z,
                            const EmbeddingProjection& proj) {
  std::vector<Matrix> p;
  p.reserve(z.size());
  for (size_t v = 0; v < z.size(); ++v) {
    p.push_back(proj.view_weights[v].transpose() * z[v]);
  }
  return p;
}

}  // namespace

Matrix EmbeddingProjection::Stacked() const {
  Eigen::Index rows = 0;
  for (const auto& w : view_weights) rows += w.rows();
  Matrix out(rows, dim);
  Eigen::Index r = 0;
  for (const auto& w : view_weights) {
    out.middleRows(r, w.rows()) = w;
    r += w.rows();
  }
  return out;
}

TraceRatioState TraceRatioObjective(std::span<const Matrix> z,
                                    const EmbeddingProjection& proj,
                                    const Matrix& l_num, const Matrix& l_den,
                                    NumeratorBlocks blocks) {
  CheckOperands(z, l_num, l_den, &proj);
  const std::vector<Matrix> p = Project(z, proj);
  Matrix total = Matrix::Zero(proj.dim, z.front().cols());
  for (const auto& pv : p) total += pv;

  TraceRatioState s;
  s.f = (total * l_num * total.transpose()).trace();
  for (const auto& pv : p) {
    if (blocks == NumeratorBlocks::kCrossViewOnly) {
      s.f -= (pv * l_num * pv.transpose()).trace();
    }
    s.g += (pv * l_den * pv.transpose()).trace();
  }
  if (!(s.g > kMinDenominator)) {
    std::ostringstream msg;
    msg << "degenerate trace-ratio denominator g = " << s.g;
    throw NumericalError(msg.str());
  }
  s.ratio = s.f / s.g;
  return s;
}

std::vector<Matrix> TraceRatioGradZ(std::span<const Matrix> z,
                                    const EmbeddingProjection& proj,
                                    const Matrix& l_num, const Matrix& l_den,
                                    NumeratorBlocks blocks) {
  const TraceRatioState s = TraceRatioObjective(z, proj, l_num, l_den, blocks);
  const std::vector<Matrix> p = Project(z, proj);
  Matrix total = Matrix::Zero(proj.dim, z.front().cols());
  for (const auto& pv : p) total += pv;
  const Matrix l_num_sym = l_num + l_num.transpose();
  const Matrix l_den_sym = l_den + l_den.transpose();

  std::vector<Matrix> grads;
  grads.reserve(z.size());
  for (size_t v = 0; v < z.size(); ++v) {
    const Matrix& w = proj.view_weights[v];
    Matrix partners = total;
    if (blocks == NumeratorBlocks::kCrossViewOnly) partners -= p[v];
    const Matrix df = w * (partners * l_num_sym);
    const Matrix dg = w * (p[v] * l_den_sym);
    grads.push_back((s.g * df - s.f * dg) / (s.g * s.g));
  }
  return grads;
}

ScatterPair BuildScatter(std::span<const Matrix> z, const Matrix& l_num,
                         const Matrix& l_den, NumeratorBlocks blocks) {
  CheckOperands(z, l_num, l_den, nullptr);
  const Matrix l_num_s = 0.5 * (l_num + l_num.transpose());
  const Matrix l_den_s = 0.5 * (l_den + l_den.transpose());
  std::vector<Eigen::Index> offset(z.size() + 1, 0);
  for (size_t v = 0; v < z.size(); ++v) offset[v + 1] = offset[v] + z[v].rows();
  const Eigen::Index dim = offset.back();

  ScatterPair out{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim)};
  for (size_t i = 0; i < z.size(); ++i) {
    const Matrix zl_num = z[i] * l_num_s;
    for (size_t j = i; j < z.size(); ++j) {
      if (i == j && blocks == NumeratorBlocks::kCrossViewOnly) continue;
      const Matrix block = zl_num * z[j].transpose();
      out.numerator.block(offset[i], offset[j], z[i].rows(), z[j].rows()) =
          block;
      out.numerator.block(offset[j], offset[i], z[j].rows(), z[i].rows()) =
          block.transpose();
    }
    Matrix den = z[i] * l_den_s * z[i].transpose();
    out.denominator.block(offset[i], offset[i], z[i].rows(), z[i].rows()) =
        0.5 * (den + den.transpose());
  }
  return out;
}

EmbeddingProjection SolveProjection(std::span<const Matrix> z,
                                    const Matrix& l_num, const Matrix& l_den,
                                    int k, NumeratorBlocks blocks,
                                    std::optional<double> eps) {
  if (k < 1) throw InputError("subspace dimension k must be >= 1");
  const ScatterPair scatter = BuildScatter(z, l_num, l_den, blocks);
  const Eigen::Index dim = scatter.numerator.rows();
  if (k > dim) {
    throw InputError("subspace dimension " + std::to_string(k) +
                     " exceeds stacked view dimension " + std::to_string(dim));
  }
  double ridge = eps.value_or(1e-6 * scatter.denominator.diagonal().mean());
  if (!eps.has_value() && !(ridge > 0.0)) ridge = 1e-12;

  const GeneralizedEigenResult eig = SolveGeneralizedEigen(
      scatter.numerator, scatter.denominator, k, ridge);

  Matrix stacked = eig.vectors;
  for (Eigen::Index c = 0; c < stacked.cols(); ++c) {
    const double n = stacked.col(c).norm();
    if (n > 0.0) stacked.col(c) /= n;
  }
  EmbeddingProjection proj;
  proj.dim = k;
  proj.eigenvalues = eig.values;
  Eigen::Index r = 0;
  for (const auto& zv : z) {
    proj.view_weights.push_back(stacked.middleRows(r, zv.rows()));
    r += zv.rows();
  }
  return proj;
}

}  // namespace mvrank
