// Trainable multi-view rankers.
//
//   MvCCAE  correlation trace ratio + per-view autoencoders, linear scorer
//   MvMDAE  discriminant trace ratio + per-view autoencoders, linear scorer
//   DMvDR   discriminant trace ratio + per-view ranking heads + fused head
//
// All three share one loop: per epoch the projection W is re-solved in
// closed form on a fixed reference batch, then mini-batch SGD moves the
// networks with W held fixed. Maximized terms (the trace ratio) enter the
// minimized loss with a negative sign.

#ifndef MVRANK_MODELS_H_
#define MVRANK_MODELS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvrank/netcore.h"
#include "mvrank/pairdata.h"
#include "mvrank/subspace.h"

namespace mvrank {

enum class ModelKind { kMvCCAE, kMvMDAE, kDMvDR };

const char* ModelKindName(ModelKind kind);  // "mvccae", "mvmdae", "dmvdr"
ModelKind ParseModelKind(const std::string& name);

inline bool UsesDiscriminantLaplacians(ModelKind kind) {
  return kind != ModelKind::kMvCCAE;
}

// a^T (e - center) + bias. An empty center means zero; a fitted center lets
// a single view's slice of `a` score that view's embedding on its own.
struct ScoringFunction {
  Vector weights;
  double bias = 0.0;
  Vector center;

  double Score(const Eigen::Ref<const Vector>& e) const {
    if (center.size() == 0) return weights.dot(e) + bias;
    return weights.dot(e - center) + bias;
  }
  // Scorer restricted to `len` embedding coordinates starting at `start`.
  ScoringFunction Slice(Eigen::Index start, Eigen::Index len) const;
};

struct TrainConfig {
  double alpha = 0.1;          // per-view term weight (AE loss or view rank loss)
  double beta = 1.0;           // fused rank loss weight (DMvDR)
  double rho = 1e-4;           // L2 penalty on encoder parameters
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 200;
  int subspace_dim = 4;
  std::uint64_t seed = 42;
  double scorer_learning_rate = 0.5;
  int scorer_epochs = 300;
  std::optional<double> eigen_eps;  // default: 1e-6 * mean diag of B

  void Validate() const;
};

// Layer layout of every sub-network. Output layers of decoders and heads are
// appended automatically: an autoencoder decoder ends in d_v units with
// `reconstruction_activation`, ranking heads end in one sigmoid unit.
struct Topology {
  std::vector<LayerSpec> encoder;
  std::vector<int> decoder_hidden;
  std::vector<int> fused_hidden;
  // Standardized features are centred, so decoders reconstruct linearly.
  Activation reconstruction_activation = Activation::kIdentity;

  int representation_dim() const { return encoder.back().units; }
};

// Per-kind defaults tuned on the synthetic benchmark.
TrainConfig DefaultTrainConfig(ModelKind kind);

// Presets: "desk" (default, sized for the synthetic benchmark),
// "university-ae" and "university-dmvdr" (the published university-ranking
// layouts).
Topology TopologyPreset(const std::string& name, ModelKind kind);

struct RankModel {
  ModelKind kind = ModelKind::kDMvDR;
  Topology topology;
  std::vector<MlpNetwork> encoders;  // F_v
  std::vector<MlpNetwork> decoders;  // G_v: decoder (AE) or ranking head
  std::optional<MlpNetwork> fused;   // H, DMvDR only
  EmbeddingProjection projection;
  std::optional<ScoringFunction> scorer;  // MvCCAE / MvMDAE only
  TrainConfig config;

  int view_count() const { return static_cast<int>(encoders.size()); }
  void Validate() const;
};

// Randomly initialized model for the given per-view input dims. The
// projection starts as the first k coordinates of every view.
RankModel InitModel(ModelKind kind, const Topology& topology,
                    std::span<const int> view_dims, const TrainConfig& cfg,
                    Rng& rng);

// Sigmoid squashed into [1e-12, 1 - 1e-12].
double RankProbability(double score);

struct RankLoss {
  double loss = 0.0;
  Vector dldp;
};

// Mean binary cross-entropy and its derivative w.r.t. each probability.
RankLoss RankLossAndGrad(const Vector& p, std::span<const int> y);

struct AutoencoderTerms {
  double loss = 0.0;            // reconstruction + rho * ||theta_F||^2
  double reconstruction = 0.0;  // ||X - G(F(X))||_F / sqrt(N)
  std::vector<LayerGrad> encoder_grads;
  std::vector<LayerGrad> decoder_grads;
  Matrix grad_z;  // d loss / d F(X), through the decoder only (N x k_z)
};

AutoencoderTerms AutoencoderLossAndGrads(const Matrix& x,
                                         const MlpNetwork& encoder,
                                         const MlpNetwork& decoder,
                                         double rho);

// Logistic regression on embeddings by full-batch gradient descent from a
// zero start. The bias and center stay at zero unless `fit_bias` is set,
// keeping p(e) + p(-e) = 1 for pairwise features. With `fit_bias` the center
// is the column mean of the embeddings.
ScoringFunction FitScoring(const Matrix& embeddings, std::span<const int> y,
                           double learning_rate, int epochs,
                           bool fit_bias = false);

// One mini-batch of aligned pairs.
struct PairBatch {
  std::vector<Matrix> features;  // per view, B x d_v
  std::vector<std::vector<int>> view_labels;
  std::vector<int> joint_labels;

  int size() const { return static_cast<int>(joint_labels.size()); }
};

PairBatch MakeBatch(const PairDataset& pairs, std::span<const int> rows);

// Scalar terms of the per-batch objective at the current parameters.
struct BatchTerms {
  double trace_ratio = 0.0;     // J' on this batch with the model's W
  double autoencoder = 0.0;     // sum_v l_AE (AE models)
  double view_rank = 0.0;       // sum_v l_rank(p_v, y_v) (DMvDR)
  double fused_rank = 0.0;      // l_rank(p_bar, y_bar) (DMvDR)
  double encoder_penalty = 0.0; // rho * sum_v ||theta_Fv||^2 (DMvDR)
  bool degenerate = false;      // single-class batch under discriminant W

  // Loss minimized by the encoders (and, for AE models, the decoders).
  double EncoderObjective(ModelKind kind, const TrainConfig& cfg) const;
};

struct ModelGradients {
  std::vector<std::vector<LayerGrad>> encoders;
  std::vector<std::vector<LayerGrad>> decoders;
  std::vector<LayerGrad> fused;
};

struct BatchStep {
  BatchTerms terms;
  ModelGradients grads;  // empty when terms.degenerate
};

// Forward-only evaluation. Throws NumericalError on a degenerate trace-ratio
// denominator; returns terms.degenerate for single-class discriminant batches.
BatchTerms EvaluateBatch(const RankModel& model, const PairBatch& batch);

// Analytic gradients of the objectives descended by each network:
//   encoders: BatchTerms::EncoderObjective
//   decoders: alpha * sum_v l_AE (AE models) or l_rank(p_v, y_v) (DMvDR)
//   fused:    l_rank(p_bar, y_bar)
BatchStep ComputeBatchStep(const RankModel& model, const PairBatch& batch);

// Embedding fed to the scorer or the fused head: [Z_1 W_1, ..., Z_V W_V].
Matrix JointEmbedding(const RankModel& model,
                      std::span<const Matrix> view_features);

struct EpochLog {
  int epoch = 0;
  double reference_ratio = 0.0;  // J' on the reference batch after solving W
  double autoencoder = 0.0;      // batch means
  double view_rank = 0.0;
  double fused_rank = 0.0;
  double encoder_objective = 0.0;
  int skipped_batches = 0;
};

struct TrainResult {
  RankModel model;
  std::vector<EpochLog> log;
};

TrainResult TrainMvCCAE(const PairDataset& data, const Topology& topology,
                        const TrainConfig& cfg);
TrainResult TrainMvMDAE(const PairDataset& data, const Topology& topology,
                        const TrainConfig& cfg);
TrainResult TrainDMvDR(const PairDataset& data, const Topology& topology,
                       const TrainConfig& cfg);
TrainResult TrainModel(ModelKind kind, const PairDataset& data,
                       const Topology& topology, const TrainConfig& cfg);

enum class PredictionScenario { kFused, kSingleView };

struct Prediction {
  Vector probabilities;
  PredictionScenario scenario = PredictionScenario::kFused;
};

// `views[v]` holds the pair features of view v, or nothing when the view is
// unavailable. Either every view or exactly one must be present.
Prediction Predict(const RankModel& model,
                   std::span<const std::optional<Matrix>> views);

}  // namespace mvrank

#endif  // MVRANK_MODELS_H_
