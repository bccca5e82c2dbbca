#include "mvrank/models.h"

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "mvrank/errors.h"
#include "mvrank/experiment.h"
#include "mvrank/gradcheck.h"
#include "mvrank/graphs.h"
#include "mvrank/synth.h"
#include "test_util.h"

namespace mvrank {
namespace {

using testing::RandomMatrix;

// Training pairs from a small default-style synthetic set.
PairDataset SmallPairs(int samples = 60, std::uint64_t seed = 3) {
  SynthSpec spec = DefaultSynthSpec();
  spec.samples = samples;
  spec.seed = seed;
  const auto views = SynthGenerate(spec);
  SplitConfig split;
  split.pairs_per_query = 10;
  return PrepareData(views, split).train_pairs;
}

TrainConfig QuickConfig(ModelKind kind) {
  TrainConfig cfg = DefaultTrainConfig(kind);
  cfg.epochs = 3;
  cfg.batch_size = 50;
  cfg.subspace_dim = kind == ModelKind::kDMvDR ? 1 : 2;
  cfg.scorer_epochs = 100;
  return cfg;
}

std::vector<int> Dims(const PairDataset& d) {
  std::vector<int> dims;
  for (const auto& x : d.features) dims.push_back(static_cast<int>(x.cols()));
  return dims;
}

PairBatch WholeBatch(const PairDataset& d) {
  std::vector<int> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  return MakeBatch(d, rows);
}

MlpNetwork IdentityNet(const std::string& name, int d) {
  MlpNetwork net;
  net.name = name;
  net.layers.push_back({Matrix::Identity(d, d), Vector::Zero(d), Activation::kIdentity});
  return net;
}

double MaxAbs(const std::vector<LayerGrad>& grads) {
  double m = 0.0;
  for (const auto& g : grads) {
    m = std::max({m, g.d_weight.cwiseAbs().maxCoeff(), g.d_bias.cwiseAbs().maxCoeff()});
  }
  return m;
}

TEST(ModelKind, NamesRoundTrip) {
  for (ModelKind k : {ModelKind::kMvCCAE, ModelKind::kMvMDAE, ModelKind::kDMvDR}) {
    EXPECT_EQ(ParseModelKind(ModelKindName(k)), k);
  }
  EXPECT_THROW(ParseModelKind("svm"), InputError);
}

TEST(RankProbability, Examples) {
  EXPECT_EQ(RankProbability(0.0), 0.5);
  EXPECT_NEAR(RankProbability(2.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(RankProbability(2.0), 0.8807970779778823, 1e-15);
  EXPECT_EQ(RankProbability(1e6), 1.0 - 1e-12);
  EXPECT_EQ(RankProbability(-1e6), 1e-12);
}

TEST(RankLoss, Examples) {
  Vector half(1);
  half << 0.5;
  const std::vector<int> one = {1};
  const RankLoss l = RankLossAndGrad(half, one);
  EXPECT_NEAR(l.loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(l.dldp(0), -2.0, 1e-15);

  Vector exact(2);
  exact << 1.0, 0.0;
  EXPECT_LT(RankLossAndGrad(exact, std::vector<int>{1, 0}).loss, 1e-11);

  Vector p(3);
  p << 0.7, 0.4, 0.9;
  const RankLoss above = RankLossAndGrad(p, std::vector<int>{0, 0, 0});
  EXPECT_TRUE((above.dldp.array() > 0.0).all());
  EXPECT_THROW(RankLossAndGrad(p, one), ShapeError);
}

TEST(RankLoss, GradientMatchesFiniteDifference) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Vector p(6);
  for (auto& v : p) v = u(rng);
  const std::vector<int> y = {1, 0, 0, 1, 1, 0};
  const Vector g = RankLossAndGrad(p, y).dldp;
  for (int i = 0; i < 6; ++i) {
    const double num = CentralDifference(
        [&](const Vector& q) { return RankLossAndGrad(q, y).loss; }, p, i, 1e-6);
    EXPECT_LE(RelativeError(g(i), num, 1e-8), 1e-6);
  }
}

TEST(Autoencoder, IdentityNetworksReconstructExactly) {
  Rng rng(5);
  const Matrix x = RandomMatrix(7, 4, rng);
  const MlpNetwork f = IdentityNet("F1", 4);
  const MlpNetwork g = IdentityNet("G1", 4);
  const AutoencoderTerms t = AutoencoderLossAndGrads(x, f, g, 0.3);
  EXPECT_EQ(t.reconstruction, 0.0);
  EXPECT_NEAR(t.loss, 0.3 * 4.0, 1e-15);
}

TEST(Autoencoder, ZeroNetworksWithSigmoidOutput) {
  Rng rng(6);
  const Matrix x = RandomMatrix(9, 3, rng);
  MlpNetwork f, g;
  f.name = "F1";
  f.layers.push_back({Matrix::Zero(2, 3), Vector::Zero(2), Activation::kSigmoid});
  g.name = "G1";
  g.layers.push_back({Matrix::Zero(3, 2), Vector::Zero(3), Activation::kSigmoid});
  const AutoencoderTerms t = AutoencoderLossAndGrads(x, f, g, 0.0);
  const double expected = (x.array() - 0.5).matrix().norm() / 3.0;
  EXPECT_NEAR(t.loss, expected, 1e-14);
  EXPECT_THROW(AutoencoderLossAndGrads(RandomMatrix(9, 4, rng), f, g, 0.0), ShapeError);
}

TEST(GradCheck, EverySuitePasses) {
  for (const auto& r : RunAllGradChecks(20, 11)) {
    EXPECT_TRUE(r.passed()) << r.name << " max rel error " << r.max_rel_error;
    EXPECT_EQ(r.instances, 20);
    EXPECT_GT(r.entries, 0);
  }
}

TEST(FitScoring, SingleClassGrowsWeights) {
  Rng rng(7);
  Matrix e = RandomMatrix(20, 1, rng).cwiseAbs();
  e.array() += 0.1;
  const std::vector<int> y(20, 1);
  double prev_norm = 0.0;
  double prev_loss = std::log(2.0) + 1e-12;
  for (int epochs : {5, 10, 20, 40, 80}) {
    const ScoringFunction s = FitScoring(e, y, 0.5, epochs);
    const Vector p = (e * s.weights).unaryExpr([](double v) { return RankProbability(v); });
    const double loss = RankLossAndGrad(p, y).loss;
    EXPECT_GT(s.weights.norm(), prev_norm);
    EXPECT_LT(loss, prev_loss);
    prev_norm = s.weights.norm();
    prev_loss = loss;
  }
}

TEST(FitScoring, SeparableOneDimensional) {
  Matrix e(8, 1);
  e << -4, -3, -2, -1, 1, 2, 3, 4;
  const std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  for (bool bias : {false, true}) {
    const ScoringFunction s = FitScoring(e, y, 0.5, 200, bias);
    for (int i = 0; i < 8; ++i) {
      EXPECT_EQ(RankProbability(s.Score(e.row(i).transpose())) >= 0.5, y[i] == 1);
    }
  }
}

TEST(FitScoring, BiasHandlesOffsetClasses) {
  // Threshold at 10, far from the origin.
  Matrix e(6, 1);
  e << 7, 8, 9, 11, 12, 13;
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  const ScoringFunction s = FitScoring(e, y, 0.5, 500, true);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(s.Score(e.row(i).transpose()) >= 0.0, y[i] == 1);
  }
}

TEST(FitScoring, ZeroFeaturesStayZero) {
  const Matrix e = Matrix::Zero(5, 3);
  const ScoringFunction s = FitScoring(e, std::vector<int>{1, 0, 1, 1, 0}, 0.5, 50);
  EXPECT_EQ(s.weights, Vector::Zero(3));
  EXPECT_EQ(RankProbability(s.Score(e.row(0).transpose())), 0.5);
  EXPECT_THROW(FitScoring(e, std::vector<int>{1}, 0.5, 1), ShapeError);
}

TEST(InitModel, StructureFollowsKind) {
  Rng rng(8);
  const std::vector<int> dims = {5, 4, 3};
  for (ModelKind kind : {ModelKind::kMvCCAE, ModelKind::kMvMDAE, ModelKind::kDMvDR}) {
    TrainConfig cfg = DefaultTrainConfig(kind);
    cfg.subspace_dim = 2;
    RankModel m = InitModel(kind, TopologyPreset("desk", kind), dims, cfg, rng);
    EXPECT_EQ(m.view_count(), 3);
    EXPECT_EQ(m.fused.has_value(), kind == ModelKind::kDMvDR);
    EXPECT_EQ(m.decoders[1].output_dim(), kind == ModelKind::kDMvDR ? 1 : 4);
    if (kind != ModelKind::kDMvDR) {
      EXPECT_THROW(m.Validate(), ShapeError);  // scorer arrives with training
      m.scorer = ScoringFunction{Vector::Zero(6), 0.0, {}};
    }
    EXPECT_NO_THROW(m.Validate());
  }
  TrainConfig big;
  big.subspace_dim = 100;
  EXPECT_THROW(InitModel(ModelKind::kMvCCAE, TopologyPreset("desk", ModelKind::kMvCCAE),
                         dims, big, rng),
               InputError);
  const std::vector<int> single = {5};
  EXPECT_THROW(InitModel(ModelKind::kMvCCAE, TopologyPreset("desk", ModelKind::kMvCCAE),
                         single, TrainConfig{}, rng),
               InputError);
  EXPECT_THROW(TopologyPreset("huge", ModelKind::kDMvDR), InputError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.batch_size = 1;
  EXPECT_THROW(cfg.Validate(), InputError);
  cfg = TrainConfig{};
  cfg.subspace_dim = 0;
  EXPECT_THROW(cfg.Validate(), InputError);
  cfg = TrainConfig{};
  cfg.alpha = -1.0;
  EXPECT_THROW(cfg.Validate(), InputError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.Validate(), InputError);
}

// Linear encoders with zero biases and a bias-free scorer.
RankModel LinearModel(Rng& rng) {
  TrainConfig cfg;
  cfg.subspace_dim = 2;
  Topology topo = TopologyPreset("desk", ModelKind::kMvMDAE);
  topo.encoder = {{3, Activation::kIdentity}};
  const std::vector<int> dims = {4, 5};
  RankModel m = InitModel(ModelKind::kMvMDAE, topo, dims, cfg, rng);
  m.scorer = ScoringFunction{RandomMatrix(4, 1, rng), 0.0, {}};
  return m;
}

TEST(Predict, ZeroScorerGivesHalf) {
  Rng rng(9);
  RankModel m = LinearModel(rng);
  m.scorer = ScoringFunction{Vector::Zero(4), 0.0, {}};
  std::vector<std::optional<Matrix>> views = {RandomMatrix(6, 4, rng),
                                              RandomMatrix(6, 5, rng)};
  const Prediction p = Predict(m, views);
  EXPECT_EQ(p.scenario, PredictionScenario::kFused);
  EXPECT_TRUE((p.probabilities.array() == 0.5).all());
}

TEST(Predict, NegatedPairsAreComplementary) {
  Rng rng(10);
  const RankModel m = LinearModel(rng);
  const Matrix a = RandomMatrix(6, 4, rng);
  const Matrix b = RandomMatrix(6, 5, rng);
  std::vector<std::optional<Matrix>> pos = {a, b};
  std::vector<std::optional<Matrix>> neg = {Matrix(-a), Matrix(-b)};
  const Vector sum = Predict(m, pos).probabilities + Predict(m, neg).probabilities;
  EXPECT_LE((sum.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Predict, ArgumentErrors) {
  Rng rng(11);
  const RankModel m = LinearModel(rng);
  std::vector<std::optional<Matrix>> none = {std::nullopt, std::nullopt};
  EXPECT_THROW(Predict(m, none), InputError);
  std::vector<std::optional<Matrix>> wrong = {RandomMatrix(3, 2, rng), std::nullopt};
  EXPECT_THROW(Predict(m, wrong), ShapeError);
  std::vector<std::optional<Matrix>> one = {RandomMatrix(3, 4, rng)};
  EXPECT_THROW(Predict(m, one), ShapeError);
  std::vector<std::optional<Matrix>> rows = {RandomMatrix(3, 4, rng),
                                             RandomMatrix(2, 5, rng)};
  EXPECT_THROW(Predict(m, rows), ShapeError);
}

TEST(Predict, SingleViewMatchesFusedForIdenticalViews) {
  Rng rng(12);
  TrainConfig cfg = DefaultTrainConfig(ModelKind::kDMvDR);
  cfg.subspace_dim = 2;
  const std::vector<int> dims = {4, 4, 4};
  RankModel m = InitModel(ModelKind::kDMvDR, TopologyPreset("desk", ModelKind::kDMvDR),
                          dims, cfg, rng);
  for (int v = 1; v < 3; ++v) {
    m.encoders[v].layers = m.encoders[0].layers;
    m.projection.view_weights[v] = m.projection.view_weights[0];
  }
  const Matrix x = RandomMatrix(10, 4, rng);
  std::vector<std::optional<Matrix>> all = {x, x, x};
  const Prediction fused = Predict(m, all);
  for (int v = 0; v < 3; ++v) {
    std::vector<std::optional<Matrix>> one(3);
    one[v] = x;
    const Prediction single = Predict(m, one);
    EXPECT_EQ(single.scenario, PredictionScenario::kSingleView);
    EXPECT_LE((single.probabilities - fused.probabilities).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Batch, MakeBatchSelectsRows) {
  const PairDataset d = SmallPairs();
  const std::vector<int> rows = {3, 0};
  const PairBatch b = MakeBatch(d, rows);
  ASSERT_EQ(b.size(), 2);
  EXPECT_EQ(b.features[1].row(0), d.features[1].row(3));
  EXPECT_EQ(b.joint_labels[1], d.joint_labels[0]);
  EXPECT_EQ(b.view_labels[2][0], d.view_labels[2][3]);
}

TEST(Batch, SingleClassDiscriminantBatchIsDegenerate) {
  const PairDataset d = SmallPairs();
  std::vector<int> ones;
  for (int r = 0; r < d.size() && ones.size() < 10; ++r) {
    if (d.joint_labels[r] == 1) ones.push_back(r);
  }
  const PairBatch b = MakeBatch(d, ones);
  Rng rng(13);
  for (ModelKind kind : {ModelKind::kMvMDAE, ModelKind::kDMvDR}) {
    TrainConfig cfg = QuickConfig(kind);
    const RankModel m = InitModel(kind, TopologyPreset("desk", kind), Dims(d), cfg, rng);
    EXPECT_TRUE(ComputeBatchStep(m, b).terms.degenerate);
    EXPECT_TRUE(EvaluateBatch(m, b).degenerate);
  }
  TrainConfig cfg = QuickConfig(ModelKind::kMvCCAE);
  const RankModel cca = InitModel(ModelKind::kMvCCAE,
                                  TopologyPreset("desk", ModelKind::kMvCCAE), Dims(d),
                                  cfg, rng);
  EXPECT_FALSE(ComputeBatchStep(cca, b).terms.degenerate);
}

TEST(Batch, StepTermsMatchForwardEvaluation) {
  const PairDataset d = SmallPairs();
  const PairBatch b = WholeBatch(d);
  Rng rng(14);
  for (ModelKind kind : {ModelKind::kMvCCAE, ModelKind::kMvMDAE, ModelKind::kDMvDR}) {
    const RankModel m =
        InitModel(kind, TopologyPreset("desk", kind), Dims(d), QuickConfig(kind), rng);
    const BatchTerms a = ComputeBatchStep(m, b).terms;
    const BatchTerms e = EvaluateBatch(m, b);
    EXPECT_NEAR(a.trace_ratio, e.trace_ratio, 1e-12);
    EXPECT_NEAR(a.autoencoder, e.autoencoder, 1e-12);
    EXPECT_NEAR(a.view_rank, e.view_rank, 1e-12);
    EXPECT_NEAR(a.fused_rank, e.fused_rank, 1e-12);
  }
}

TEST(Batch, ZeroAlphaLeavesDecodersUntouched) {
  const PairDataset d = SmallPairs();
  Rng rng(15);
  TrainConfig cfg = QuickConfig(ModelKind::kMvCCAE);
  cfg.alpha = 0.0;
  const RankModel m = InitModel(ModelKind::kMvCCAE,
                                TopologyPreset("desk", ModelKind::kMvCCAE), Dims(d), cfg,
                                rng);
  const BatchStep s = ComputeBatchStep(m, WholeBatch(d));
  for (const auto& g : s.grads.decoders) EXPECT_EQ(MaxAbs(g), 0.0);
  EXPECT_GT(MaxAbs(s.grads.encoders[0]), 0.0);
}

TEST(Batch, DmvdrWithoutRankTermsFollowsEmbeddingGradientOnly) {
  const PairDataset d = SmallPairs();
  const PairBatch b = WholeBatch(d);
  Rng rng(16);
  TrainConfig cfg = QuickConfig(ModelKind::kDMvDR);
  cfg.alpha = 0.0;
  cfg.beta = 0.0;
  cfg.rho = 0.0;
  const RankModel dm = InitModel(ModelKind::kDMvDR,
                                 TopologyPreset("desk", ModelKind::kDMvDR), Dims(d), cfg,
                                 rng);
  // Same encoders and projection under the discriminant autoencoder model
  // with its per-view term switched off: only the trace ratio remains.
  RankModel ae = InitModel(ModelKind::kMvMDAE, dm.topology, Dims(d), cfg, rng);
  ae.encoders = dm.encoders;
  ae.projection = dm.projection;
  const BatchStep s = ComputeBatchStep(dm, b);
  const BatchStep r = ComputeBatchStep(ae, b);
  for (int v = 0; v < dm.view_count(); ++v) {
    EXPECT_GT(MaxAbs(s.grads.decoders[v]), 0.0);  // heads always train
    for (size_t l = 0; l < s.grads.encoders[v].size(); ++l) {
      EXPECT_LE((s.grads.encoders[v][l].d_weight - r.grads.encoders[v][l].d_weight)
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
  }
}

TEST(Training, SeedDeterminism) {
  const PairDataset d = SmallPairs();
  for (ModelKind kind : {ModelKind::kMvCCAE, ModelKind::kMvMDAE, ModelKind::kDMvDR}) {
    const TrainConfig cfg = QuickConfig(kind);
    const Topology topo = TopologyPreset("desk", kind);
    const TrainResult a = TrainModel(kind, d, topo, cfg);
    const TrainResult b = TrainModel(kind, d, topo, cfg);
    for (int v = 0; v < a.model.view_count(); ++v) {
      EXPECT_EQ(FlattenParameters(a.model.encoders[v]),
                FlattenParameters(b.model.encoders[v]));
      EXPECT_EQ(FlattenParameters(a.model.decoders[v]),
                FlattenParameters(b.model.decoders[v]));
    }
    EXPECT_EQ(a.model.projection.Stacked(), b.model.projection.Stacked());
    EXPECT_EQ(a.log.back().encoder_objective, b.log.back().encoder_objective);
    TrainConfig other = cfg;
    other.seed = cfg.seed + 1;
    const TrainResult c = TrainModel(kind, d, topo, other);
    EXPECT_NE(FlattenParameters(a.model.encoders[0]),
              FlattenParameters(c.model.encoders[0]));
  }
}

TEST(Training, CorrelationRatioRisesOverFirstEpochs) {
  const PairDataset d = SmallPairs(120);
  TrainConfig cfg = DefaultTrainConfig(ModelKind::kMvCCAE);
  cfg.epochs = 5;
  cfg.scorer_epochs = 1;
  const TrainResult r =
      TrainModel(ModelKind::kMvCCAE, d, TopologyPreset("desk", ModelKind::kMvCCAE), cfg);
  ASSERT_EQ(r.log.size(), 5u);
  for (size_t e = 1; e < r.log.size(); ++e) {
    EXPECT_GE(r.log[e].reference_ratio, r.log[e - 1].reference_ratio) << "epoch " << e;
  }
}

// Pairs whose first feature in every view is the sign of the label.
PairDataset SeparablePairs(Rng& rng) {
  const int m = 200;
  PairDataset p;
  p.joint_labels.resize(m);
  for (int r = 0; r < m; ++r) p.joint_labels[r] = r % 2;
  for (int d : {10, 8}) {
    Matrix x = 0.3 * RandomMatrix(m, d, rng);
    for (int r = 0; r < m; ++r) x(r, 0) += p.joint_labels[r] ? 2.0 : -2.0;
    p.features.push_back(x);
    p.view_labels.push_back(p.joint_labels);
  }
  p.query_of_pair.assign(m, 0);
  p.item_of_pair.assign(m, 1);
  return p;
}

double Accuracy(const Vector& p, const std::vector<int>& y) {
  int ok = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) ok += (p(i) >= 0.5) == (y[i] == 1);
  return static_cast<double>(ok) / p.size();
}

TEST(Training, DiscriminantAutoencoderSeparatesSeparablePairs) {
  Rng rng(17);
  const PairDataset d = SeparablePairs(rng);
  // Two classes give a rank-one between-class scatter. Longer runs saturate
  // the encoders until the within-class scatter vanishes.
  TrainConfig cfg = DefaultTrainConfig(ModelKind::kMvMDAE);
  cfg.epochs = 3;
  cfg.batch_size = 50;
  cfg.subspace_dim = 1;
  const TrainResult r =
      TrainModel(ModelKind::kMvMDAE, d, TopologyPreset("desk", ModelKind::kMvMDAE), cfg);
  const Prediction p = Predict(r.model, AllViews(d));
  EXPECT_GE(Accuracy(p.probabilities, d.joint_labels), 0.95);
}

// Between-class over within-class scatter traces of the rows of x.
double FisherRatio(const Matrix& x, const std::vector<int>& y) {
  const Vector mean = x.colwise().mean().transpose();
  double between = 0.0, within = 0.0;
  for (int c = 0; c < 2; ++c) {
    std::vector<int> rows;
    for (int r = 0; r < x.rows(); ++r) if (y[r] == c) rows.push_back(r);
    Matrix xc(rows.size(), x.cols());
    for (size_t i = 0; i < rows.size(); ++i) xc.row(i) = x.row(rows[i]);
    const Vector mc = xc.colwise().mean().transpose();
    between += rows.size() * (mc - mean).squaredNorm();
    within += (xc.rowwise() - mc.transpose()).squaredNorm();
  }
  return between / within;
}

TEST(Training, DiscriminantEmbeddingSeparatesBetterThanRawFeatures) {
  const PairDataset d = SmallPairs(120);
  TrainConfig cfg = DefaultTrainConfig(ModelKind::kMvMDAE);
  cfg.epochs = 5;
  cfg.subspace_dim = 1;
  const TrainResult r =
      TrainModel(ModelKind::kMvMDAE, d, TopologyPreset("desk", ModelKind::kMvMDAE), cfg);
  Matrix raw(d.size(), 0);
  for (const auto& x : d.features) {
    Matrix next(d.size(), raw.cols() + x.cols());
    next << raw, x;
    raw = next;
  }
  const Matrix projected = JointEmbedding(r.model, d.features);
  EXPECT_GT(FisherRatio(projected, d.joint_labels), FisherRatio(raw, d.joint_labels));
}

TEST(Training, DmvdrFusedLossFallsAndRowsStayUnitNorm) {
  const PairDataset d = SmallPairs(120);
  TrainConfig cfg = DefaultTrainConfig(ModelKind::kDMvDR);
  cfg.epochs = 10;
  const TrainResult r =
      TrainModel(ModelKind::kDMvDR, d, TopologyPreset("desk", ModelKind::kDMvDR), cfg);
  EXPECT_LT(r.log.back().fused_rank, r.log.front().fused_rank);
  auto check = [](const MlpNetwork& net) {
    for (const auto& layer : net.layers) {
      const Vector norms = layer.weight.rowwise().norm();
      EXPECT_LE((norms.array() - 1.0).abs().maxCoeff(), 1e-9) << net.name;
    }
  };
  for (const auto& net : r.model.encoders) check(net);
  for (const auto& net : r.model.decoders) check(net);
  check(*r.model.fused);
}

TEST(Training, RejectsUnusableData) {
  PairDataset d = SmallPairs();
  const Topology topo = TopologyPreset("desk", ModelKind::kMvMDAE);
  const TrainConfig cfg = QuickConfig(ModelKind::kMvMDAE);

  PairDataset one_view = d;
  one_view.features.resize(1);
  one_view.view_labels.resize(1);
  EXPECT_THROW(TrainModel(ModelKind::kMvMDAE, one_view, topo, cfg), InputError);

  PairDataset single_class = d;
  single_class.joint_labels.assign(d.size(), 1);
  EXPECT_THROW(TrainModel(ModelKind::kMvMDAE, single_class, topo, cfg), TrainingError);

  PairDataset ragged = d;
  ragged.features[1] = ragged.features[1].topRows(5).eval();
  EXPECT_THROW(TrainModel(ModelKind::kMvMDAE, ragged, topo, cfg), ShapeError);
}

}  // namespace
}  // namespace mvrank
