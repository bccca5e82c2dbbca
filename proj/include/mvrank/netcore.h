// Dense matrix aliases, explicit-backprop multilayer perceptrons and the
// symmetric / generalized symmetric eigensolvers used by the embedding layer.

#ifndef MVRANK_NETCORE_H_
#define MVRANK_NETCORE_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mvrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Throws InputError when any entry is NaN or infinite. `what` names the
// operand in the message.
void CheckFinite(const Matrix& m, const std::string& what);

enum class Activation { kSigmoid, kIdentity };

const char* ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

// One affine layer followed by an elementwise activation. Inputs are batches
// with one sample per row, so the layer computes act(X * weight^T + bias^T).
struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::kSigmoid;

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

struct MlpNetwork {
  std::string name;  // role tag, e.g. "F1", "G2", "H"
  std::vector<DenseLayer> layers;

  int input_dim() const;
  int output_dim() const;
  int parameter_count() const;

  // Throws ShapeError when adjacent layers do not chain or a bias length
  // disagrees with its weight, InputError on non-finite parameters.
  void Validate() const;
};

struct LayerSpec {
  int units = 0;
  Activation activation = Activation::kSigmoid;
};

// Builds a network whose weights are uniform in [-1/sqrt(fan_in),
// 1/sqrt(fan_in)] and whose biases are zero.
MlpNetwork MakeMlp(std::string name, int input_dim,
                   std::span<const LayerSpec> layers, Rng& rng);

// Intermediates of one forward pass, consumed by MlpBackward.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> activations;
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

ForwardResult MlpForward(const MlpNetwork& net, const Matrix& input);

// Output only; skips building the cache.
Matrix MlpPredict(const MlpNetwork& net, const Matrix& input);

struct LayerGrad {
  Matrix d_weight;
  Vector d_bias;
};

struct BackwardResult {
  std::vector<LayerGrad> layer_grads;
  Matrix grad_input;
};

// Gradients are summed over the batch; any averaging belongs to the loss
// that produced `grad_output`.
BackwardResult MlpBackward(const MlpNetwork& net, const ForwardCache& cache,
                           const Matrix& grad_output);

// Parameter vectors in layer order: weight (column-major) then bias.
Vector FlattenParameters(const MlpNetwork& net);
void AssignParameters(MlpNetwork& net, const Vector& flat);
Vector FlattenGradients(std::span<const LayerGrad> grads);

// Sum of squares over every weight and bias.
double SquaredParameterNorm(const MlpNetwork& net);

// Rescales every neuron's incoming weight vector (a row of `weight`) to unit
// Euclidean norm. Zero rows are left untouched.
void NormalizeNeuronWeights(MlpNetwork& net);

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values(i)
};

// Cyclic Jacobi rotations. Input must be symmetric within 1e-9 (relative to
// the largest entry) or InputError is thrown.
EigenDecomposition SymmetricEigen(const Matrix& a);

struct GeneralizedEigenResult {
  Matrix vectors;  // dim x k, (B + eps I)-orthonormal columns
  Vector values;   // k, descending
};

// Top-k solutions of A w = lambda (B + eps I) w. The regularized B is
// Cholesky-factored and the whitened problem is handed to SymmetricEigen.
GeneralizedEigenResult SolveGeneralizedEigen(const Matrix& a, const Matrix& b,
                                             int k, double eps);

}  // namespace mvrank

#endif  // MVRANK_NETCORE_H_
