#include "mvrank/gradcheck.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mvrank/errors.h"
#include "mvrank/graphs.h"
#include "mvrank/models.h"
#include "mvrank/subspace.h"

namespace mvrank {
namespace {

// Error floor per instance: entries far below the largest gradient of the
// instance cannot be resolved by a central difference in double precision,
// so they are compared against this fraction of that largest magnitude.
constexpr double kRelativeFloor = 1e-3;
constexpr double kAbsoluteFloor = 1e-8;

// Parameters perturbed per network in the composed-model suites.
constexpr int kSampledParameters = 24;

struct SuiteSpec {
  std::string name;
  double h;
  double tolerance;
};

const std::vector<SuiteSpec>& Suites() {
  static const std::vector<SuiteSpec> suites = {
      {"mlp_backprop", 1e-5, 1e-5},    {"trace_ratio_cca", 1e-6, 1e-4},
      {"trace_ratio_mda", 1e-6, 1e-4}, {"autoencoder", 1e-6, 1e-4},
      {"mvccae", 1e-4, 1e-3},          {"mvmdae", 1e-4, 1e-3},
      {"dmvdr", 1e-4, 1e-3},
  };
  return suites;
}

Matrix Gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

int Uniform(int lo, int hi, Rng& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Binary labels with both classes present.
std::vector<int> MixedLabels(int n, Rng& rng) {
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) y[i] = Uniform(0, 1, rng);
  y[0] = 0;
  y[1] = 1;
  return y;
}

// Randomizes biases too; freshly built networks start them at zero, which
// would leave the bias gradients untested around a special point.
void Jitter(MlpNetwork& net, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 0.3);
  for (auto& l : net.layers) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = dist(rng);
  }
}

std::vector<Eigen::Index> SampleIndices(Eigen::Index count, int limit, Rng& rng) {
  std::vector<Eigen::Index> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  if (count > limit) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(limit);
  }
  return idx;
}

struct Tally {
  long long entries = 0;
  double max_rel_error = 0.0;
  std::vector<std::pair<double, double>> pending;

  void Add(double analytic, double numeric) { pending.emplace_back(analytic, numeric); }

  // Closes one random instance.
  void Flush() {
    double scale = 0.0;
    for (const auto& [a, n] : pending) scale = std::max(scale, std::abs(a));
    const double floor = std::max(kAbsoluteFloor, kRelativeFloor * scale);
    for (const auto& [a, n] : pending) {
      max_rel_error = std::max(max_rel_error, RelativeError(a, n, floor));
    }
    entries += static_cast<long long>(pending.size());
    pending.clear();
  }
};

// Compares the analytic gradient of `objective` w.r.t. the parameters of
// `net` on the listed coordinates.
void CheckNetwork(MlpNetwork& net, const Vector& analytic,
                  std::span<const Eigen::Index> coords,
                  const std::function<double()>& objective, double h,
                  Tally& tally) {
  const Vector base = FlattenParameters(net);
  auto f = [&](const Vector& theta) {
    AssignParameters(net, theta);
    return objective();
  };
  for (Eigen::Index i : coords) {
    tally.Add(analytic(i), CentralDifference(f, base, i, h));
  }
  AssignParameters(net, base);
}

void MlpInstance(Rng& rng, double h, Tally& tally) {
  const int in = Uniform(2, 6, rng);
  const int hidden = Uniform(2, 6, rng);
  const int out = Uniform(1, 4, rng);
  const int n = Uniform(1, 8, rng);
  const Activation last =
      Uniform(0, 1, rng) == 0 ? Activation::kSigmoid : Activation::kIdentity;
  const std::vector<LayerSpec> layers = {{hidden, Activation::kSigmoid},
                                         {out, last}};
  MlpNetwork net = MakeMlp("N", in, layers, rng);
  Jitter(net, rng);
  const Matrix x = Gaussian(n, in, rng);
  const Matrix target = Gaussian(n, out, rng);

  // Loss 0.5 * ||net(x) - target||^2.
  const ForwardResult fwd = MlpForward(net, x);
  const BackwardResult back = MlpBackward(net, fwd.cache, fwd.output - target);
  const Vector analytic = FlattenGradients(back.layer_grads);
  std::vector<Eigen::Index> all(analytic.size());
  std::iota(all.begin(), all.end(), 0);
  CheckNetwork(net, analytic, all,
               [&] { return 0.5 * (MlpPredict(net, x) - target).squaredNorm(); },
               h, tally);

  // Input gradient through the same loss.
  const auto loss_of_input = [&](const Vector& flat) {
    const Matrix xi = Eigen::Map<const Matrix>(flat.data(), n, in);
    return 0.5 * (MlpPredict(net, xi) - target).squaredNorm();
  };
  const Vector x_flat = Eigen::Map<const Vector>(x.data(), x.size());
  for (Eigen::Index i = 0; i < x_flat.size(); ++i) {
    tally.Add(back.grad_input.data()[i], CentralDifference(loss_of_input, x_flat, i, h));
  }
}

void TraceRatioInstance(Rng& rng, double h, bool discriminant, Tally& tally) {
  const int views = Uniform(2, 3, rng);
  const int n = Uniform(4, 20, rng);
  const int k = Uniform(1, 3, rng);
  std::vector<Matrix> z;
  EmbeddingProjection proj;
  proj.dim = k;
  proj.eigenvalues = Vector::Zero(k);
  for (int v = 0; v < views; ++v) {
    const int d = Uniform(k, 6, rng);
    z.push_back(Gaussian(d, n, rng));
    proj.view_weights.push_back(Gaussian(d, k, rng));
  }
  Matrix l_num, l_den;
  NumeratorBlocks blocks;
  if (discriminant) {
    const std::vector<int> y = MixedLabels(n, rng);
    const ClassPartition part = MakePartition(y);
    l_num = BetweenClassLaplacian(part);
    l_den = WithinClassLaplacian(part);
    blocks = NumeratorBlocks::kAllPairs;
  } else {
    l_num = CenteringLaplacian(n);
    l_den = l_num;
    blocks = NumeratorBlocks::kCrossViewOnly;
  }
  const std::vector<Matrix> grad = TraceRatioGradZ(z, proj, l_num, l_den, blocks);
  for (int v = 0; v < views; ++v) {
    const Matrix zv = z[v];
    const auto f = [&](const Vector& flat) {
      z[v] = Eigen::Map<const Matrix>(flat.data(), zv.rows(), zv.cols());
      const double r = TraceRatioObjective(z, proj, l_num, l_den, blocks).ratio;
      z[v] = zv;
      return r;
    };
    const Vector flat = Eigen::Map<const Vector>(zv.data(), zv.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      tally.Add(grad[v].data()[i], CentralDifference(f, flat, i, h));
    }
  }
}

void AutoencoderInstance(Rng& rng, double h, Tally& tally) {
  const int d = Uniform(2, 6, rng);
  const int n = Uniform(2, 10, rng);
  const std::vector<LayerSpec> enc_layers = {{Uniform(2, 5, rng), Activation::kSigmoid},
                                             {Uniform(1, 4, rng), Activation::kSigmoid}};
  MlpNetwork enc = MakeMlp("F", d, enc_layers, rng);
  const std::vector<LayerSpec> dec_layers = {{Uniform(2, 5, rng), Activation::kSigmoid},
                                             {d, Activation::kSigmoid}};
  MlpNetwork dec = MakeMlp("G", enc.output_dim(), dec_layers, rng);
  Jitter(enc, rng);
  Jitter(dec, rng);
  const Matrix x = Gaussian(n, d, rng);
  const double rho = 0.05;
  const AutoencoderTerms t = AutoencoderLossAndGrads(x, enc, dec, rho);
  const auto loss = [&] { return AutoencoderLossAndGrads(x, enc, dec, rho).loss; };
  for (MlpNetwork* net : {&enc, &dec}) {
    const Vector analytic =
        FlattenGradients(net == &enc ? t.encoder_grads : t.decoder_grads);
    std::vector<Eigen::Index> all(analytic.size());
    std::iota(all.begin(), all.end(), 0);
    CheckNetwork(*net, analytic, all, loss, h, tally);
  }
}

void ComposedInstance(ModelKind kind, Rng& rng, double h, Tally& tally) {
  const int views = Uniform(2, 3, rng);
  const int n = Uniform(6, 16, rng);
  Topology topo;
  topo.encoder = {{Uniform(3, 5, rng), Activation::kSigmoid},
                  {Uniform(2, 4, rng), Activation::kSigmoid}};
  topo.decoder_hidden = {Uniform(2, 4, rng)};
  topo.fused_hidden = {Uniform(2, 4, rng)};
  TrainConfig cfg;
  cfg.alpha = 0.7;
  cfg.beta = 0.9;
  cfg.rho = 0.01;
  cfg.subspace_dim = Uniform(1, topo.encoder.back().units, rng);
  std::vector<int> dims(views);
  for (auto& d : dims) d = Uniform(2, 5, rng);
  RankModel model = InitModel(kind, topo, dims, cfg, rng);
  for (auto& net : model.encoders) Jitter(net, rng);
  for (auto& net : model.decoders) Jitter(net, rng);
  if (model.fused) Jitter(*model.fused, rng);
  for (auto& w : model.projection.view_weights) w = Gaussian(w.rows(), w.cols(), rng);

  PairBatch batch;
  for (int d : dims) batch.features.push_back(Gaussian(n, d, rng));
  for (int v = 0; v < views; ++v) batch.view_labels.push_back(MixedLabels(n, rng));
  batch.joint_labels = MixedLabels(n, rng);

  const BatchStep step = ComputeBatchStep(model, batch);
  const auto encoder_objective = [&] {
    return EvaluateBatch(model, batch).EncoderObjective(kind, cfg);
  };
  const auto decoder_objective = [&] {
    const BatchTerms t = EvaluateBatch(model, batch);
    return kind == ModelKind::kDMvDR ? t.view_rank : cfg.alpha * t.autoencoder;
  };
  for (int v = 0; v < views; ++v) {
    const Vector g = FlattenGradients(step.grads.encoders[v]);
    CheckNetwork(model.encoders[v], g, SampleIndices(g.size(), kSampledParameters, rng),
                 encoder_objective, h, tally);
    const Vector gd = FlattenGradients(step.grads.decoders[v]);
    CheckNetwork(model.decoders[v], gd,
                 SampleIndices(gd.size(), kSampledParameters, rng),
                 decoder_objective, h, tally);
  }
  if (kind == ModelKind::kDMvDR) {
    const Vector g = FlattenGradients(step.grads.fused);
    CheckNetwork(*model.fused, g, SampleIndices(g.size(), kSampledParameters, rng),
                 [&] { return EvaluateBatch(model, batch).fused_rank; }, h, tally);
  }
}

}  // namespace

double RelativeError(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

double CentralDifference(const std::function<double(const Vector&)>& f,
                         Vector x, Eigen::Index i, double h) {
  const double x0 = x(i);
  x(i) = x0 + h;
  const double plus = f(x);
  x(i) = x0 - h;
  const double minus = f(x);
  return (plus - minus) / (2.0 * h);
}

std::vector<std::string> GradCheckSuiteNames() {
  std::vector<std::string> names;
  for (const auto& s : Suites()) names.push_back(s.name);
  return names;
}

GradCheckSuiteResult RunGradCheckSuite(const std::string& name, int instances,
                                       std::uint64_t seed) {
  const auto it = std::find_if(Suites().begin(), Suites().end(),
                               [&](const SuiteSpec& s) { return s.name == name; });
  if (it == Suites().end()) throw InputError("unknown gradient suite '" + name + "'");
  if (instances < 1) throw InputError("gradient suite needs at least one instance");
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  Tally tally;
  for (int i = 0; i < instances; ++i) {
    if (name == "mlp_backprop") {
      MlpInstance(rng, it->h, tally);
    } else if (name == "trace_ratio_cca") {
      TraceRatioInstance(rng, it->h, false, tally);
    } else if (name == "trace_ratio_mda") {
      TraceRatioInstance(rng, it->h, true, tally);
    } else if (name == "autoencoder") {
      AutoencoderInstance(rng, it->h, tally);
    } else {
      ComposedInstance(ParseModelKind(name), rng, it->h, tally);
    }
    tally.Flush();
  }
  GradCheckSuiteResult r;
  r.name = name;
  r.instances = instances;
  r.entries = tally.entries;
  r.max_rel_error = tally.max_rel_error;
  r.tolerance = it->tolerance;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                  .count();
  return r;
}

std::vector<GradCheckSuiteResult> RunAllGradChecks(int instances,
                                                   std::uint64_t seed) {
  std::vector<GradCheckSuiteResult> out;
  for (const auto& s : Suites()) {
    out.push_back(RunGradCheckSuite(s.name, instances, seed));
  }
  return out;
}

}  // namespace mvrank
