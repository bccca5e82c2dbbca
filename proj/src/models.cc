#include "mvrank/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "mvrank/errors.h"
#include "mvrank/graphs.h"

namespace mvrank {
namespace {

constexpr double kProbabilityFloor = 1e-12;

double Clamp(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

NumeratorBlocks BlocksFor(ModelKind kind) {
  return UsesDiscriminantLaplacians(kind) ? NumeratorBlocks::kAllPairs
                                          : NumeratorBlocks::kCrossViewOnly;
}

struct Laplacians {
  Matrix numerator;
  Matrix denominator;
  bool degenerate = false;
};

Laplacians BatchLaplacians(ModelKind kind, std::span<const int> joint_labels) {
  const int n = static_cast<int>(joint_labels.size());
  Laplacians out;
  if (!UsesDiscriminantLaplacians(kind)) {
    out.numerator = CenteringLaplacian(n);
    out.denominator = out.numerator;
    return out;
  }
  const ClassPartition part = MakePartition(joint_labels);
  if (part.classes.size() < 2) {
    out.degenerate = true;
    return out;
  }
  out.numerator = BetweenClassLaplacian(part);
  out.denominator = WithinClassLaplacian(part);
  return out;
}

std::vector<Matrix> Transposed(const std::vector<Matrix>& z) {
  std::vector<Matrix> out;
  out.reserve(z.size());
  for (const auto& m : z) out.push_back(m.transpose());
  return out;
}

void AddPenaltyGrad(std::vector<LayerGrad>& grads, const MlpNetwork& net,
                    double rho) {
  if (rho == 0.0) return;
  for (size_t l = 0; l < grads.size(); ++l) {
    grads[l].d_weight += 2.0 * rho * net.layers[l].weight;
    grads[l].d_bias += 2.0 * rho * net.layers[l].bias;
  }
}

std::vector<LayerGrad> Scaled(std::vector<LayerGrad> g, double scale) {
  for (auto& lg : g) {
    lg.d_weight *= scale;
    lg.d_bias *= scale;
  }
  return g;
}

void ApplyStep(MlpNetwork& net, const std::vector<LayerGrad>& grads,
               double learning_rate) {
  for (size_t l = 0; l < net.layers.size(); ++l) {
    net.layers[l].weight -= learning_rate * grads[l].d_weight;
    net.layers[l].bias -= learning_rate * grads[l].d_bias;
  }
}

Vector FirstColumn(const Matrix& m) { return m.col(0); }

struct ReconstructionGrad {
  double reconstruction = 0.0;
  std::vector<LayerGrad> decoder_grads;
  Matrix grad_z;
};

// ||X - G(Z)||_F / sqrt(N) and its gradients w.r.t. G and Z.
ReconstructionGrad Reconstruction(const Matrix& x, const Matrix& z,
                                  const MlpNetwork& decoder) {
  ForwardResult fwd = MlpForward(decoder, z);
  if (fwd.output.cols() != x.cols()) {
    throw ShapeError("decoder " + decoder.name + " reconstructs " +
                     std::to_string(fwd.output.cols()) + " features, input has " +
                     std::to_string(x.cols()));
  }
  const double sqrt_n = std::sqrt(static_cast<double>(x.rows()));
  const Matrix residual = fwd.output - x;
  const double norm = residual.norm();
  ReconstructionGrad out;
  out.reconstruction = norm / sqrt_n;
  const Matrix grad_out =
      norm > 0.0 ? Matrix(residual / (norm * sqrt_n))
                 : Matrix(Matrix::Zero(residual.rows(), residual.cols()));
  BackwardResult back = MlpBackward(decoder, fwd.cache, grad_out);
  out.decoder_grads = std::move(back.layer_grads);
  out.grad_z = std::move(back.grad_input);
  return out;
}

Matrix ProjectView(const Matrix& z, const Matrix& w) { return z * w; }

Matrix Concatenate(const RankModel& model, const std::vector<Matrix>& z) {
  const int k = model.projection.dim;
  const Eigen::Index n = z.front().rows();
  Matrix s(n, static_cast<Eigen::Index>(k) * model.view_count());
  for (int v = 0; v < model.view_count(); ++v) {
    s.middleCols(static_cast<Eigen::Index>(v) * k, k) =
        ProjectView(z[v], model.projection.view_weights[v]);
  }
  return s;
}

void CheckBatch(const RankModel& model, const PairBatch& batch) {
  if (static_cast<int>(batch.features.size()) != model.view_count()) {
    throw ShapeError("batch has " + std::to_string(batch.features.size()) +
                     " views, model has " + std::to_string(model.view_count()));
  }
  for (const auto& x : batch.features) {
    if (x.rows() != batch.size()) {
      throw ShapeError("batch view row count disagrees with label count");
    }
  }
  if (model.kind == ModelKind::kDMvDR &&
      static_cast<int>(batch.view_labels.size()) != model.view_count()) {
    throw ShapeError("DMvDR batch needs per-view labels for every view");
  }
}

}  // namespace

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMvCCAE:
      return "mvccae";
    case ModelKind::kMvMDAE:
      return "mvmdae";
    case ModelKind::kDMvDR:
      return "dmvdr";
  }
  return "?";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "mvccae") return ModelKind::kMvCCAE;
  if (name == "mvmdae") return ModelKind::kMvMDAE;
  if (name == "dmvdr") return ModelKind::kDMvDR;
  throw InputError("unknown method '" + name + "' (mvccae|mvmdae|dmvdr)");
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) { throw InputError(what); };
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(beta >= 0.0)) fail("beta must be >= 0");
  if (!(rho >= 0.0)) fail("rho must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning rate must be > 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 2) fail("batch size must be >= 2");
  if (subspace_dim < 1) fail("subspace dimension must be >= 1");
  if (!(scorer_learning_rate > 0.0)) fail("scorer learning rate must be > 0");
  if (scorer_epochs < 0) fail("scorer epochs must be >= 0");
  if (eigen_eps.has_value() && !(*eigen_eps >= 0.0)) fail("eps must be >= 0");
}

Topology TopologyPreset(const std::string& name, ModelKind kind) {
  Topology t;
  const auto sig = Activation::kSigmoid;
  const bool dmvdr = kind == ModelKind::kDMvDR;
  if (name == "desk") {
    // A linear last encoder layer keeps the rank signal alive through the
    // unit-norm rows DMvDR imposes on every layer.
    t.encoder = dmvdr ? std::vector<LayerSpec>{{16, sig}, {8, Activation::kIdentity}}
                      : std::vector<LayerSpec>{{24, sig}, {8, sig}};
    t.decoder_hidden = {24};
    t.fused_hidden = {16};
  } else if (name == "university-ae") {
    t.encoder = {{16, sig}, {32, sig}, {10, sig}};
    t.decoder_hidden = {64};
  } else if (name == "university-dmvdr") {
    t.encoder = {{50, sig}, {10, sig}, {1, sig}};
    t.decoder_hidden = {100};
    t.fused_hidden = {100};
  } else {
    throw InputError("unknown topology preset '" + name + "'");
  }
  if (!dmvdr) t.fused_hidden.clear();
  return t;
}

TrainConfig DefaultTrainConfig(ModelKind kind) {
  TrainConfig cfg;
  if (kind == ModelKind::kDMvDR) {
    // Two classes give the discriminant numerator rank one, so only the
    // leading direction carries signal.
    cfg.alpha = 0.1;
    cfg.learning_rate = 0.5;
    cfg.epochs = 20;
    cfg.subspace_dim = 1;
  } else {
    cfg.alpha = 5.0;
    cfg.learning_rate = 0.05;
    cfg.epochs = 30;
    cfg.subspace_dim = 8;
  }
  return cfg;
}

void RankModel::Validate() const {
  if (encoders.size() < 2) throw ShapeError("a model needs at least two views");
  if (decoders.size() != encoders.size()) {
    throw ShapeError("model needs one decoder per encoder");
  }
  if (fused.has_value() != (kind == ModelKind::kDMvDR)) {
    throw ShapeError("fused network must be present exactly for DMvDR");
  }
  if (kind != ModelKind::kDMvDR && !scorer.has_value()) {
    throw ShapeError("subspace models need a scoring function");
  }
  if (projection.view_count() != view_count()) {
    throw ShapeError("projection view count disagrees with encoders");
  }
  for (int v = 0; v < view_count(); ++v) {
    encoders[v].Validate();
    decoders[v].Validate();
    const Matrix& w = projection.view_weights[v];
    if (w.rows() != encoders[v].output_dim() || w.cols() != projection.dim) {
      throw ShapeError("projection block " + std::to_string(v) +
                       " does not match encoder output");
    }
    if (decoders[v].input_dim() != encoders[v].output_dim()) {
      throw ShapeError("decoder " + decoders[v].name +
                       " does not consume encoder output");
    }
  }
  if (fused.has_value()) {
    fused->Validate();
    if (fused->input_dim() != projection.dim * view_count() ||
        fused->output_dim() != 1) {
      throw ShapeError("fused network must map k*V inputs to one output");
    }
  }
  if (scorer.has_value() &&
      (scorer->weights.size() != projection.dim * view_count() ||
       (scorer->center.size() != 0 && scorer->center.size() != scorer->weights.size()))) {
    throw ShapeError("scorer length must equal k*V");
  }
}

RankModel InitModel(ModelKind kind, const Topology& topology,
                    std::span<const int> view_dims, const TrainConfig& cfg,
                    Rng& rng) {
  cfg.Validate();
  if (view_dims.size() < 2) throw InputError("a model needs at least two views");
  if (topology.encoder.empty()) throw InputError("encoder needs layers");
  const int kz = topology.representation_dim();
  const int views = static_cast<int>(view_dims.size());
  if (cfg.subspace_dim > kz * views) {
    throw InputError("subspace dimension exceeds stacked representation size");
  }

  RankModel model;
  model.kind = kind;
  model.topology = topology;
  model.config = cfg;
  for (int v = 0; v < views; ++v) {
    const std::string tag = std::to_string(v + 1);
    model.encoders.push_back(
        MakeMlp("F" + tag, view_dims[v], topology.encoder, rng));
    std::vector<LayerSpec> dec;
    for (int u : topology.decoder_hidden) dec.push_back({u, Activation::kSigmoid});
    if (kind == ModelKind::kDMvDR) {
      dec.push_back({1, Activation::kSigmoid});
    } else {
      dec.push_back({view_dims[v], topology.reconstruction_activation});
    }
    model.decoders.push_back(MakeMlp("G" + tag, kz, dec, rng));
  }
  if (kind == ModelKind::kDMvDR) {
    std::vector<LayerSpec> fused;
    for (int u : topology.fused_hidden) fused.push_back({u, Activation::kSigmoid});
    fused.push_back({1, Activation::kSigmoid});
    model.fused = MakeMlp("H", cfg.subspace_dim * views, fused, rng);
    for (auto& net : model.encoders) NormalizeNeuronWeights(net);
    for (auto& net : model.decoders) NormalizeNeuronWeights(net);
    NormalizeNeuronWeights(*model.fused);
  }

  model.projection.dim = cfg.subspace_dim;
  model.projection.eigenvalues = Vector::Zero(cfg.subspace_dim);
  for (int v = 0; v < views; ++v) {
    model.projection.view_weights.push_back(
        Matrix::Identity(kz, cfg.subspace_dim) / std::sqrt(views));
  }
  return model;
}

double RankProbability(double score) {
  if (score >= 0) return Clamp(1.0 / (1.0 + std::exp(-score)));
  const double e = std::exp(score);
  return Clamp(e / (1.0 + e));
}

RankLoss RankLossAndGrad(const Vector& p, std::span<const int> y) {
  if (p.size() != static_cast<Eigen::Index>(y.size())) {
    throw ShapeError("rank loss: " + std::to_string(p.size()) +
                     " probabilities vs " + std::to_string(y.size()) + " labels");
  }
  const auto n = static_cast<double>(p.size());
  RankLoss out;
  out.dldp.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = Clamp(p(i));
    const double yi = y[i];
    out.loss -= yi * std::log(pi) + (1.0 - yi) * std::log(1.0 - pi);
    out.dldp(i) = (pi - yi) / ((1.0 - pi) * pi) / n;
  }
  out.loss /= n;
  return out;
}

AutoencoderTerms AutoencoderLossAndGrads(const Matrix& x,
                                         const MlpNetwork& encoder,
                                         const MlpNetwork& decoder,
                                         double rho) {
  if (decoder.output_dim() != x.cols()) {
    throw ShapeError("decoder " + decoder.name + " outputs " +
                     std::to_string(decoder.output_dim()) + " features, input has " +
                     std::to_string(x.cols()));
  }
  ForwardResult enc = MlpForward(encoder, x);
  ReconstructionGrad rec = Reconstruction(x, enc.output, decoder);
  AutoencoderTerms out;
  out.reconstruction = rec.reconstruction;
  out.loss = rec.reconstruction + rho * SquaredParameterNorm(encoder);
  BackwardResult back = MlpBackward(encoder, enc.cache, rec.grad_z);
  out.encoder_grads = std::move(back.layer_grads);
  AddPenaltyGrad(out.encoder_grads, encoder, rho);
  out.decoder_grads = std::move(rec.decoder_grads);
  out.grad_z = std::move(rec.grad_z);
  return out;
}

ScoringFunction FitScoring(const Matrix& embeddings, std::span<const int> y,
                           double learning_rate, int epochs, bool fit_bias) {
  if (embeddings.rows() != static_cast<Eigen::Index>(y.size())) {
    throw ShapeError("scorer fit: " + std::to_string(embeddings.rows()) +
                     " rows vs " + std::to_string(y.size()) + " labels");
  }
  ScoringFunction s;
  s.weights = Vector::Zero(embeddings.cols());
  if (y.empty()) return s;
  // With a bias the fit runs on standardized columns, which keeps gradient
  // descent well conditioned, and the scaling is folded back afterwards.
  Vector mean = Vector::Zero(embeddings.cols());
  Vector scale = Vector::Ones(embeddings.cols());
  if (fit_bias) {
    mean = embeddings.colwise().mean().transpose();
    const Matrix centered = embeddings.rowwise() - mean.transpose();
    const double n = static_cast<double>(embeddings.rows());
    for (Eigen::Index c = 0; c < embeddings.cols(); ++c) {
      const double sd = std::sqrt(centered.col(c).squaredNorm() / n);
      scale(c) = sd > 1e-12 ? sd : 1.0;
    }
  }
  const Matrix x = fit_bias ? Matrix((embeddings.rowwise() - mean.transpose())
                                         .array()
                                         .rowwise() /
                                     scale.transpose().array())
                            : embeddings;
  Vector target(y.size());
  for (size_t i = 0; i < y.size(); ++i) target(i) = y[i];
  const double n = static_cast<double>(y.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Vector scores = x * s.weights;
    scores.array() += s.bias;
    const Vector residual =
        scores.unaryExpr([](double v) { return RankProbability(v); }) - target;
    s.weights -= learning_rate * (x.transpose() * residual) / n;
    if (fit_bias) s.bias -= learning_rate * residual.mean();
  }
  if (fit_bias) {
    s.weights = s.weights.cwiseQuotient(scale);
    s.center = mean;
  }
  return s;
}

ScoringFunction ScoringFunction::Slice(Eigen::Index start, Eigen::Index len) const {
  ScoringFunction out;
  out.weights = weights.segment(start, len);
  out.bias = bias;
  if (center.size() > 0) out.center = center.segment(start, len);
  return out;
}

PairBatch MakeBatch(const PairDataset& pairs, std::span<const int> rows) {
  PairBatch b;
  const int m = static_cast<int>(rows.size());
  for (const auto& x : pairs.features) {
    Matrix sub(m, x.cols());
    for (int r = 0; r < m; ++r) sub.row(r) = x.row(rows[r]);
    b.features.push_back(std::move(sub));
  }
  for (const auto& y : pairs.view_labels) {
    std::vector<int> sub(m);
    for (int r = 0; r < m; ++r) sub[r] = y[rows[r]];
    b.view_labels.push_back(std::move(sub));
  }
  b.joint_labels.resize(m);
  for (int r = 0; r < m; ++r) b.joint_labels[r] = pairs.joint_labels[rows[r]];
  return b;
}

double BatchTerms::EncoderObjective(ModelKind kind,
                                    const TrainConfig& cfg) const {
  if (kind == ModelKind::kDMvDR) {
    return -trace_ratio + cfg.alpha * view_rank + cfg.beta * fused_rank +
           encoder_penalty;
  }
  return -trace_ratio + cfg.alpha * autoencoder;
}

BatchTerms EvaluateBatch(const RankModel& model, const PairBatch& batch) {
  CheckBatch(model, batch);
  BatchTerms terms;
  const Laplacians lap = BatchLaplacians(model.kind, batch.joint_labels);
  if (lap.degenerate) {
    terms.degenerate = true;
    return terms;
  }
  std::vector<Matrix> z;
  for (int v = 0; v < model.view_count(); ++v) {
    z.push_back(MlpPredict(model.encoders[v], batch.features[v]));
  }
  terms.trace_ratio =
      TraceRatioObjective(Transposed(z), model.projection, lap.numerator,
                          lap.denominator, BlocksFor(model.kind))
          .ratio;
  const double rho = model.config.rho;
  if (model.kind != ModelKind::kDMvDR) {
    for (int v = 0; v < model.view_count(); ++v) {
      const Matrix recon = MlpPredict(model.decoders[v], z[v]);
      terms.autoencoder +=
          (batch.features[v] - recon).norm() /
              std::sqrt(static_cast<double>(batch.size())) +
          rho * SquaredParameterNorm(model.encoders[v]);
    }
    return terms;
  }
  for (int v = 0; v < model.view_count(); ++v) {
    const Vector p = FirstColumn(MlpPredict(model.decoders[v], z[v]));
    terms.view_rank += RankLossAndGrad(p, batch.view_labels[v]).loss;
    terms.encoder_penalty += rho * SquaredParameterNorm(model.encoders[v]);
  }
  const Vector p_bar = FirstColumn(MlpPredict(*model.fused, Concatenate(model, z)));
  terms.fused_rank = RankLossAndGrad(p_bar, batch.joint_labels).loss;
  return terms;
}

BatchStep ComputeBatchStep(const RankModel& model, const PairBatch& batch) {
  CheckBatch(model, batch);
  BatchStep step;
  const Laplacians lap = BatchLaplacians(model.kind, batch.joint_labels);
  if (lap.degenerate) {
    step.terms.degenerate = true;
    return step;
  }
  const int views = model.view_count();
  const TrainConfig& cfg = model.config;
  std::vector<ForwardResult> enc;
  std::vector<Matrix> z;
  for (int v = 0; v < views; ++v) {
    enc.push_back(MlpForward(model.encoders[v], batch.features[v]));
    z.push_back(enc.back().output);
  }
  const std::vector<Matrix> zt = Transposed(z);
  const NumeratorBlocks blocks = BlocksFor(model.kind);
  step.terms.trace_ratio = TraceRatioObjective(zt, model.projection,
                                               lap.numerator, lap.denominator,
                                               blocks)
                               .ratio;
  const std::vector<Matrix> ratio_grad = TraceRatioGradZ(
      zt, model.projection, lap.numerator, lap.denominator, blocks);

  // d(encoder objective)/dZ_v, N x k_z, assembled per view.
  std::vector<Matrix> grad_z(views);
  for (int v = 0; v < views; ++v) grad_z[v] = -ratio_grad[v].transpose();

  if (model.kind != ModelKind::kDMvDR) {
    for (int v = 0; v < views; ++v) {
      ReconstructionGrad rec =
          Reconstruction(batch.features[v], z[v], model.decoders[v]);
      step.terms.autoencoder +=
          rec.reconstruction + cfg.rho * SquaredParameterNorm(model.encoders[v]);
      grad_z[v] += cfg.alpha * rec.grad_z;
      step.grads.decoders.push_back(Scaled(std::move(rec.decoder_grads), cfg.alpha));
    }
    for (int v = 0; v < views; ++v) {
      BackwardResult back = MlpBackward(model.encoders[v], enc[v].cache, grad_z[v]);
      AddPenaltyGrad(back.layer_grads, model.encoders[v], cfg.alpha * cfg.rho);
      step.grads.encoders.push_back(std::move(back.layer_grads));
    }
    return step;
  }

  for (int v = 0; v < views; ++v) {
    ForwardResult head = MlpForward(model.decoders[v], z[v]);
    const RankLoss rl = RankLossAndGrad(FirstColumn(head.output), batch.view_labels[v]);
    step.terms.view_rank += rl.loss;
    step.terms.encoder_penalty += cfg.rho * SquaredParameterNorm(model.encoders[v]);
    BackwardResult back = MlpBackward(model.decoders[v], head.cache, Matrix(rl.dldp));
    step.grads.decoders.push_back(std::move(back.layer_grads));
    grad_z[v] += cfg.alpha * back.grad_input;
  }

  ForwardResult fused = MlpForward(*model.fused, Concatenate(model, z));
  const RankLoss fl = RankLossAndGrad(FirstColumn(fused.output), batch.joint_labels);
  step.terms.fused_rank = fl.loss;
  BackwardResult fused_back = MlpBackward(*model.fused, fused.cache, Matrix(fl.dldp));
  step.grads.fused = std::move(fused_back.layer_grads);
  const int k = model.projection.dim;
  for (int v = 0; v < views; ++v) {
    const Matrix ds = fused_back.grad_input.middleCols(static_cast<Eigen::Index>(v) * k, k);
    grad_z[v] += cfg.beta * ds * model.projection.view_weights[v].transpose();
  }
  for (int v = 0; v < views; ++v) {
    BackwardResult back = MlpBackward(model.encoders[v], enc[v].cache, grad_z[v]);
    AddPenaltyGrad(back.layer_grads, model.encoders[v], cfg.rho);
    step.grads.encoders.push_back(std::move(back.layer_grads));
  }
  return step;
}

Matrix JointEmbedding(const RankModel& model,
                      std::span<const Matrix> view_features) {
  if (static_cast<int>(view_features.size()) != model.view_count()) {
    throw ShapeError("expected " + std::to_string(model.view_count()) +
                     " views, got " + std::to_string(view_features.size()));
  }
  std::vector<Matrix> z;
  for (int v = 0; v < model.view_count(); ++v) {
    z.push_back(MlpPredict(model.encoders[v], view_features[v]));
  }
  return Concatenate(model, z);
}

namespace {

// Re-solves W on the reference batch. The sign of each column is a free
// choice, so it is fixed to make the reference embedding correlate positively
// with the joint labels, falling back to agreement with the previous
// projection when that correlation vanishes. A stable sign matters because
// unit-norm rows of a single-input layer cannot follow a flip.
EmbeddingProjection SolveReference(const RankModel& model,
                                   const PairBatch& reference) {
  const Laplacians lap = BatchLaplacians(model.kind, reference.joint_labels);
  if (lap.degenerate) {
    throw TrainingError("reference batch holds a single class");
  }
  std::vector<Matrix> zt;
  for (int v = 0; v < model.view_count(); ++v) {
    zt.push_back(MlpPredict(model.encoders[v], reference.features[v]).transpose());
  }
  EmbeddingProjection next =
      SolveProjection(zt, lap.numerator, lap.denominator, model.projection.dim,
                      BlocksFor(model.kind), model.config.eigen_eps);
  const int n = reference.size();
  Vector label(n);
  for (int i = 0; i < n; ++i) label(i) = reference.joint_labels[i];
  label.array() -= label.mean();
  for (int c = 0; c < next.dim; ++c) {
    double with_label = 0.0;
    double scale = 0.0;
    double with_previous = 0.0;
    for (int v = 0; v < model.view_count(); ++v) {
      const Vector e = zt[v].transpose() * next.view_weights[v].col(c);
      with_label += e.dot(label);
      scale += e.norm() * label.norm();
      with_previous +=
          (zt[v].transpose() * model.projection.view_weights[v].col(c)).dot(e);
    }
    const bool flip = std::abs(with_label) > 1e-9 * scale ? with_label < 0.0
                                                          : with_previous < 0.0;
    if (flip) {
      for (auto& w : next.view_weights) w.col(c) *= -1.0;
    }
  }
  return next;
}

void CheckTrainingData(const PairDataset& data, ModelKind kind) {
  if (data.view_count() < 2) throw InputError("training needs at least two views");
  if (data.size() < 2) throw InputError("training needs at least two pairs");
  for (const auto& x : data.features) {
    if (x.rows() != data.size()) {
      throw ShapeError("per-view pair counts are not aligned");
    }
    CheckFinite(x, "pair features");
  }
  if (kind == ModelKind::kDMvDR &&
      static_cast<int>(data.view_labels.size()) != data.view_count()) {
    throw InputError("DMvDR needs per-view labels");
  }
}

bool Finite(const BatchTerms& t) {
  return std::isfinite(t.trace_ratio) && std::isfinite(t.autoencoder) &&
         std::isfinite(t.view_rank) && std::isfinite(t.fused_rank) &&
         std::isfinite(t.encoder_penalty);
}

}  // namespace

TrainResult TrainModel(ModelKind kind, const PairDataset& data,
                       const Topology& topology, const TrainConfig& cfg) {
  cfg.Validate();
  CheckTrainingData(data, kind);
  Rng rng(cfg.seed);
  std::vector<int> dims;
  for (const auto& x : data.features) dims.push_back(static_cast<int>(x.cols()));
  TrainResult result;
  RankModel& model = result.model;
  model = InitModel(kind, topology, dims, cfg, rng);

  const int m = data.size();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const int ref_size = std::min(cfg.batch_size, m);
  const PairBatch reference =
      MakeBatch(data, std::span<const int>(order.data(), ref_size));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    model.projection = SolveReference(model, reference);
    EpochLog log;
    log.epoch = epoch;
    log.reference_ratio = EvaluateBatch(model, reference).trace_ratio;

    std::shuffle(order.begin(), order.end(), rng);
    int used = 0;
    for (int start = 0; start < m; start += cfg.batch_size) {
      const int len = std::min(cfg.batch_size, m - start);
      if (len < 2) continue;
      const PairBatch batch =
          MakeBatch(data, std::span<const int>(order.data() + start, len));
      BatchStep step = ComputeBatchStep(model, batch);
      if (step.terms.degenerate) {
        ++log.skipped_batches;
        spdlog::warn("epoch {}: skipping single-class batch at offset {}",
                     epoch, start);
        continue;
      }
      if (!Finite(step.terms)) {
        throw TrainingError("non-finite objective in epoch " +
                            std::to_string(epoch));
      }
      for (int v = 0; v < model.view_count(); ++v) {
        ApplyStep(model.encoders[v], step.grads.encoders[v], cfg.learning_rate);
        ApplyStep(model.decoders[v], step.grads.decoders[v], cfg.learning_rate);
      }
      if (model.fused.has_value()) {
        ApplyStep(*model.fused, step.grads.fused, cfg.learning_rate);
        for (auto& net : model.encoders) NormalizeNeuronWeights(net);
        for (auto& net : model.decoders) NormalizeNeuronWeights(net);
        NormalizeNeuronWeights(*model.fused);
      }
      ++used;
      log.autoencoder += step.terms.autoencoder;
      log.view_rank += step.terms.view_rank;
      log.fused_rank += step.terms.fused_rank;
      log.encoder_objective += step.terms.EncoderObjective(kind, cfg);
    }
    if (used == 0) {
      throw TrainingError("every batch of epoch " + std::to_string(epoch) +
                          " was degenerate");
    }
    log.autoencoder /= used;
    log.view_rank /= used;
    log.fused_rank /= used;
    log.encoder_objective /= used;
    result.log.push_back(log);
  }

  if (kind != ModelKind::kDMvDR) {
    model.projection = SolveReference(model, reference);
    const Matrix e = JointEmbedding(model, data.features);
    model.scorer = FitScoring(e, data.joint_labels, cfg.scorer_learning_rate,
                              cfg.scorer_epochs, true);
  }
  return result;
}

TrainResult TrainMvCCAE(const PairDataset& data, const Topology& topology,
                        const TrainConfig& cfg) {
  return TrainModel(ModelKind::kMvCCAE, data, topology, cfg);
}

TrainResult TrainMvMDAE(const PairDataset& data, const Topology& topology,
                        const TrainConfig& cfg) {
  return TrainModel(ModelKind::kMvMDAE, data, topology, cfg);
}

TrainResult TrainDMvDR(const PairDataset& data, const Topology& topology,
                       const TrainConfig& cfg) {
  return TrainModel(ModelKind::kDMvDR, data, topology, cfg);
}

Prediction Predict(const RankModel& model,
                   std::span<const std::optional<Matrix>> views) {
  if (static_cast<int>(views.size()) != model.view_count()) {
    throw ShapeError("prediction expects " + std::to_string(model.view_count()) +
                     " view slots, got " + std::to_string(views.size()));
  }
  std::vector<int> present;
  for (int v = 0; v < model.view_count(); ++v) {
    if (!views[v].has_value()) continue;
    present.push_back(v);
    if (views[v]->cols() != model.encoders[v].input_dim()) {
      throw ShapeError("view " + std::to_string(v) + " has " +
                       std::to_string(views[v]->cols()) + " features, model expects " +
                       std::to_string(model.encoders[v].input_dim()));
    }
  }
  if (present.empty()) throw InputError("prediction needs at least one view");
  const Eigen::Index n = views[present.front()]->rows();
  for (int v : present) {
    if (views[v]->rows() != n) throw ShapeError("views disagree on pair count");
  }
  if (present.size() != 1 && static_cast<int>(present.size()) != model.view_count()) {
    throw InputError("prediction needs either every view or exactly one");
  }

  Prediction out;
  const int k = model.projection.dim;
  const int views_n = model.view_count();
  Matrix embedding;
  if (static_cast<int>(present.size()) == views_n) {
    out.scenario = PredictionScenario::kFused;
    std::vector<Matrix> x;
    for (const auto& m : views) x.push_back(*m);
    embedding = JointEmbedding(model, x);
  } else {
    out.scenario = PredictionScenario::kSingleView;
    const int v = present.front();
    const Matrix proj = MlpPredict(model.encoders[v], *views[v]) *
                        model.projection.view_weights[v];
    if (model.kind == ModelKind::kDMvDR) {
      embedding.resize(n, static_cast<Eigen::Index>(k) * views_n);
      for (int slot = 0; slot < views_n; ++slot) {
        embedding.middleCols(static_cast<Eigen::Index>(slot) * k, k) = proj;
      }
    } else {
      embedding = proj;
    }
  }

  out.probabilities.resize(n);
  if (model.kind == ModelKind::kDMvDR) {
    const Vector p = FirstColumn(MlpPredict(*model.fused, embedding));
    for (Eigen::Index i = 0; i < n; ++i) out.probabilities(i) = Clamp(p(i));
    return out;
  }
  if (!model.scorer.has_value()) throw StateError("model has no scoring function");
  const ScoringFunction scorer =
      out.scenario == PredictionScenario::kSingleView
          ? model.scorer->Slice(static_cast<Eigen::Index>(present.front()) * k, k)
          : *model.scorer;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.probabilities(i) = RankProbability(scorer.Score(embedding.row(i).transpose()));
  }
  return out;
}

}  // namespace mvrank
