#include "mvrank/graphs.h"

#include <map>
#include <string>

#include "mvrank/errors.h"

namespace mvrank {

ClassPartition MakePartition(std::span<const int> labels) {
  ClassPartition part;
  part.labels.assign(labels.begin(), labels.end());
  const int n = part.size();
  std::map<int, int> slot;
  for (int label : labels) {
    if (!slot.contains(label)) slot.emplace(label, 0);
  }
  int next = 0;
  for (auto& [id, s] : slot) {
    s = next++;
    ClassPartition::Class c;
    c.id = id;
    c.indicator = Vector::Zero(n);
    part.classes.push_back(std::move(c));
  }
  for (int i = 0; i < n; ++i) {
    auto& c = part.classes[slot.at(part.labels[i])];
    c.indicator(i) = 1.0;
    ++c.count;
  }
  return part;
}

Matrix CenteringLaplacian(int n) {
  if (n < 1) throw InputError("centering Laplacian needs N >= 1");
  Matrix l = Matrix::Constant(n, n, -1.0 / n);
  l.diagonal().array() += 1.0;
  return l;
}

namespace {

void CheckClasses(const ClassPartition& part, const char* what) {
  if (part.size() < 1) {
    throw InputError(std::string(what) + ": empty partition");
  }
  for (const auto& c : part.classes) {
    if (c.count < 1) {
      throw InputError(std::string(what) + ": class " + std::to_string(c.id) +
                       " is empty");
    }
  }
}

}  // namespace

Matrix BetweenClassLaplacian(const ClassPartition& part) {
  CheckClasses(part, "between-class Laplacian");
  const int n = part.size();
  const int n_classes = static_cast<int>(part.classes.size());
  // sum over q of the p-q term collapses to
  //   C/N_p^2 e_p e_p^T - (1/N_p) e_p (sum_q e_q / N_q)^T.
  Vector mean_indicator = Vector::Zero(n);
  for (const auto& c : part.classes) mean_indicator += c.indicator / c.count;
  Matrix l = Matrix::Zero(n, n);
  for (const auto& p : part.classes) {
    const double np = p.count;
    l += (static_cast<double>(n_classes) / (np * np)) * p.indicator *
             p.indicator.transpose() -
         (1.0 / np) * p.indicator * mean_indicator.transpose();
  }
  l *= 2.0;
  return 0.5 * (l + l.transpose());
}

Matrix WithinClassLaplacian(const ClassPartition& part) {
  CheckClasses(part, "within-class Laplacian");
  const int n = part.size();
  Matrix l = Matrix::Identity(n, n);
  for (const auto& c : part.classes) {
    l -= (1.0 / c.count) * c.indicator * c.indicator.transpose();
  }
  return l;
}

Matrix CrossViewCovariance(const Matrix& z_i, const Matrix& z_j, int n) {
  if (z_i.cols() != n || z_j.cols() != n) {
    throw ShapeError("cross-view covariance: inputs have " +
                     std::to_string(z_i.cols()) + " and " +
                     std::to_string(z_j.cols()) + " samples, expected " +
                     std::to_string(n));
  }
  if (n < 1) throw InputError("cross-view covariance needs N >= 1");
  const Matrix ci = z_i.colwise() - z_i.rowwise().mean();
  const Matrix cj = z_j.colwise() - z_j.rowwise().mean();
  return (ci * cj.transpose()) / static_cast<double>(n);
}

}  // namespace mvrank
