#include "mvrank/netcore.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "mvrank/errors.h"

namespace mvrank {
namespace {

double Sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix Activate(const Matrix& pre, Activation a) {
  switch (a) {
    case Activation::kSigmoid:
      return pre.unaryExpr([](double v) { return Sigmoid(v); });
    case Activation::kIdentity:
      return pre;
  }
  return pre;
}

void CheckSymmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << what << " must be square, got " << a.rows() << "x" << a.cols();
    throw ShapeError(msg.str());
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    std::ostringstream msg;
    msg << what << " is not symmetric (max |A - A^T| = " << asym << ")";
    throw InputError(msg.str());
  }
}

}  // namespace

void CheckFinite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw InputError(what + " contains NaN or infinite entries");
  }
}

const char* ActivationName(Activation a) {
  return a == Activation::kSigmoid ? "sigmoid" : "identity";
}

Activation ParseActivation(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "identity") return Activation::kIdentity;
  throw InputError("unknown activation '" + name + "'");
}

int MlpNetwork::input_dim() const {
  return layers.empty() ? 0 : layers.front().in_dim();
}

int MlpNetwork::output_dim() const {
  return layers.empty() ? 0 : layers.back().out_dim();
}

int MlpNetwork::parameter_count() const {
  int n = 0;
  for (const auto& l : layers) {
    n += static_cast<int>(l.weight.size() + l.bias.size());
  }
  return n;
}

void MlpNetwork::Validate() const {
  if (layers.empty()) {
    throw ShapeError("network " + name + " has no layers");
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.weight.rows()) {
      std::ostringstream msg;
      msg << "network " << name << " layer " << i << ": bias length "
          << l.bias.size() << " != weight rows " << l.weight.rows();
      throw ShapeError(msg.str());
    }
    if (i > 0 && l.in_dim() != layers[i - 1].out_dim()) {
      std::ostringstream msg;
      msg << "network " << name << " layer " << i << ": input dim "
          << l.in_dim() << " does not match previous output dim "
          << layers[i - 1].out_dim();
      throw ShapeError(msg.str());
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      std::ostringstream msg;
      msg << "network " << name << " layer " << i
          << " has non-finite parameters";
      throw InputError(msg.str());
    }
  }
}

MlpNetwork MakeMlp(std::string name, int input_dim,
                   std::span<const LayerSpec> layers, Rng& rng) {
  if (input_dim <= 0 || layers.empty()) {
    throw InputError("network " + name +
                     " needs a positive input dim and at least one layer");
  }
  MlpNetwork net;
  net.name = std::move(name);
  int fan_in = input_dim;
  for (const auto& spec : layers) {
    if (spec.units <= 0) {
      throw InputError("network " + net.name + " has a layer with no units");
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer;
    layer.weight.resize(spec.units, fan_in);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        layer.weight(r, c) = dist(rng);
      }
    }
    layer.bias = Vector::Zero(spec.units);
    layer.activation = spec.activation;
    net.layers.push_back(std::move(layer));
    fan_in = spec.units;
  }
  return net;
}

ForwardResult MlpForward(const MlpNetwork& net, const Matrix& input) {
  if (net.layers.empty()) {
    throw ShapeError("network " + net.name + " has no layers");
  }
  if (input.rows() < 1) {
    throw ShapeError("network " + net.name + ": empty batch");
  }
  ForwardResult result;
  result.cache.input = input;
  result.cache.pre_activations.reserve(net.layers.size());
  result.cache.activations.reserve(net.layers.size());
  const Matrix* current = &result.cache.input;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    if (current->cols() != layer.in_dim()) {
      std::ostringstream msg;
      msg << "network " << net.name << " layer " << i << ": expects "
          << layer.in_dim() << " inputs, got " << current->cols();
      throw ShapeError(msg.str());
    }
    Matrix pre = (*current) * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    result.cache.activations.push_back(Activate(pre, layer.activation));
    result.cache.pre_activations.push_back(std::move(pre));
    current = &result.cache.activations.back();
  }
  result.output = result.cache.activations.back();
  return result;
}

Matrix MlpPredict(const MlpNetwork& net, const Matrix& input) {
  if (net.layers.empty()) {
    throw ShapeError("network " + net.name + " has no layers");
  }
  Matrix current = input;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    if (current.cols() != layer.in_dim()) {
      std::ostringstream msg;
      msg << "network " << net.name << " layer " << i << ": expects "
          << layer.in_dim() << " inputs, got " << current.cols();
      throw ShapeError(msg.str());
    }
    Matrix pre = current * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    current = Activate(pre, layer.activation);
  }
  return current;
}

BackwardResult MlpBackward(const MlpNetwork& net, const ForwardCache& cache,
                           const Matrix& grad_output) {
  const size_t n_layers = net.layers.size();
  if (cache.activations.size() != n_layers ||
      cache.pre_activations.size() != n_layers) {
    throw StateError("forward cache of " +
                     std::to_string(cache.activations.size()) +
                     " layers does not belong to network " + net.name);
  }
  for (size_t i = 0; i < n_layers; ++i) {
    if (cache.activations[i].cols() != net.layers[i].out_dim() ||
        cache.activations[i].rows() != cache.input.rows()) {
      throw StateError("forward cache does not match network " + net.name);
    }
  }
  if (cache.input.cols() != net.input_dim()) {
    throw StateError("forward cache input does not match network " + net.name);
  }
  const Matrix& out = cache.activations.back();
  if (grad_output.rows() != out.rows() || grad_output.cols() != out.cols()) {
    std::ostringstream msg;
    msg << "network " << net.name << ": grad_output is " << grad_output.rows()
        << "x" << grad_output.cols() << ", output is " << out.rows() << "x"
        << out.cols();
    throw ShapeError(msg.str());
  }

  BackwardResult result;
  result.layer_grads.resize(n_layers);
  Matrix grad = grad_output;
  for (size_t idx = n_layers; idx-- > 0;) {
    const auto& layer = net.layers[idx];
    Matrix delta;
    if (layer.activation == Activation::kSigmoid) {
      const Matrix& a = cache.activations[idx];
      delta = grad.cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
    } else {
      delta = std::move(grad);
    }
    const Matrix& layer_input =
        idx == 0 ? cache.input : cache.activations[idx - 1];
    result.layer_grads[idx].d_weight = delta.transpose() * layer_input;
    result.layer_grads[idx].d_bias = delta.colwise().sum().transpose();
    grad = delta * layer.weight;
  }
  result.grad_input = std::move(grad);
  return result;
}

Vector FlattenParameters(const MlpNetwork& net) {
  Vector flat(net.parameter_count());
  Eigen::Index pos = 0;
  for (const auto& l : net.layers) {
    flat.segment(pos, l.weight.size()) =
        Eigen::Map<const Vector>(l.weight.data(), l.weight.size());
    pos += l.weight.size();
    flat.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  }
  return flat;
}

void AssignParameters(MlpNetwork& net, const Vector& flat) {
  if (flat.size() != net.parameter_count()) {
    throw ShapeError("parameter vector length " + std::to_string(flat.size()) +
                     " != network " + net.name + " parameter count " +
                     std::to_string(net.parameter_count()));
  }
  Eigen::Index pos = 0;
  for (auto& l : net.layers) {
    Eigen::Map<Vector>(l.weight.data(), l.weight.size()) =
        flat.segment(pos, l.weight.size());
    pos += l.weight.size();
    l.bias = flat.segment(pos, l.bias.size());
    pos += l.bias.size();
  }
}

Vector FlattenGradients(std::span<const LayerGrad> grads) {
  Eigen::Index n = 0;
  for (const auto& g : grads) n += g.d_weight.size() + g.d_bias.size();
  Vector flat(n);
  Eigen::Index pos = 0;
  for (const auto& g : grads) {
    flat.segment(pos, g.d_weight.size()) =
        Eigen::Map<const Vector>(g.d_weight.data(), g.d_weight.size());
    pos += g.d_weight.size();
    flat.segment(pos, g.d_bias.size()) = g.d_bias;
    pos += g.d_bias.size();
  }
  return flat;
}

double SquaredParameterNorm(const MlpNetwork& net) {
  double s = 0.0;
  for (const auto& l : net.layers) {
    s += l.weight.squaredNorm() + l.bias.squaredNorm();
  }
  return s;
}

void NormalizeNeuronWeights(MlpNetwork& net) {
  for (auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      const double n = l.weight.row(r).norm();
      if (n > 0.0) l.weight.row(r) /= n;
    }
  }
}

EigenDecomposition SymmetricEigen(const Matrix& input) {
  CheckSymmetric(input, "SymmetricEigen operand");
  CheckFinite(input, "SymmetricEigen operand");
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);

  const double total = a.squaredNorm();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off <= 1e-32 * total || off == 0.0) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) {
                     return a(x, x) > a(y, y);
                   });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

GeneralizedEigenResult SolveGeneralizedEigen(const Matrix& a, const Matrix& b,
                                             int k, double eps) {
  CheckSymmetric(a, "generalized eigenproblem A");
  CheckSymmetric(b, "generalized eigenproblem B");
  if (a.rows() != b.rows()) {
    throw ShapeError("generalized eigenproblem: A is " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     ", B is " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  const Eigen::Index dim = a.rows();
  if (k < 1 || k > dim) {
    throw InputError("requested " + std::to_string(k) +
                     " eigenpairs from a problem of dimension " +
                     std::to_string(dim));
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw InputError("regularization eps must be finite and non-negative");
  }

  Matrix b_reg = 0.5 * (b + b.transpose());
  b_reg.diagonal().array() += eps;
  Eigen::LLT<Matrix> llt(b_reg);
  const auto not_pd = [&] {
    std::ostringstream msg;
    msg << "B + eps*I is not positive definite (eps = " << eps
        << "); increase eps";
    return NumericalError(msg.str());
  };
  if (llt.info() != Eigen::Success) throw not_pd();
  const Matrix l = llt.matrixL();
  const Vector pivots = l.diagonal();
  if (!pivots.allFinite() || pivots.minCoeff() <= 0.0 ||
      pivots.minCoeff() * pivots.minCoeff() <
          1e-15 * pivots.maxCoeff() * pivots.maxCoeff()) {
    throw not_pd();
  }

  const auto lower = l.triangularView<Eigen::Lower>();
  const Matrix x = lower.solve(0.5 * (a + a.transpose()));
  Matrix whitened = lower.solve(x.transpose());
  whitened = 0.5 * (whitened + whitened.transpose()).eval();

  EigenDecomposition eig = SymmetricEigen(whitened);
  GeneralizedEigenResult out;
  out.values = eig.values.head(k);
  out.vectors = l.transpose().triangularView<Eigen::Upper>().solve(
      eig.vectors.leftCols(k));
  return out;
}

}  // namespace mvrank
