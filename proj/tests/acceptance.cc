// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "mvrank/cli.h"
#include "mvrank/experiment.h"
#include "mvrank/gradcheck.h"
#include "mvrank/graphs.h"
#include "mvrank/metrics.h"
#include "mvrank/models.h"
#include "mvrank/netcore.h"
#include "mvrank/synth.h"
#include "oracles.h"
#include "test_util.h"

namespace mvrank {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = true;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

Outcome GradientSuite() {
  const auto start = Clock::now();
  const std::vector<GradCheckSuiteResult> results = RunAllGradChecks(20, 2024);
  const double secs = Seconds(start);
  Outcome out;
  std::string failed;
  double worst = 0.0;
  for (const auto& r : results) {
    worst = std::max(worst, r.max_rel_error / r.tolerance);
    if (!r.passed() || r.instances < 20) failed += " " + r.name;
  }
  out.passed = failed.empty() && secs < 60.0;
  out.detail = Fmt("%zu suites, worst error/tolerance %.3g, %.1f s", results.size(),
                   worst, secs);
  if (!failed.empty()) out.detail += "; failed:" + failed;
  return out;
}

Outcome EigenSuite() {
  Rng rng(31);
  double worst_residual = 0.0, worst_oracle = 0.0, worst_orth = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 8;
    const Matrix a = testing::RandomSymmetric(d, rng);
    // Every fourth denominator is rank deficient and relies on the ridge.
    Matrix b = testing::RandomSpd(d, rng);
    double eps = 0.0;
    if (trial % 4 == 3) {
      const Matrix f = testing::RandomMatrix(d, std::max(1, d / 2), rng);
      b = f * f.transpose();
      eps = 1e-2;
    }
    const GeneralizedEigenResult r = SolveGeneralizedEigen(a, b, d, eps);
    const Matrix breg = b + eps * Matrix::Identity(d, d);
    for (int i = 0; i < d; ++i) {
      const double res =
          (a * r.vectors.col(i) - r.values(i) * breg * r.vectors.col(i)).norm();
      worst_residual = std::max(worst_residual, res / std::max(a.norm(), 1e-300));
    }
    worst_orth = std::max(
        worst_orth, (r.vectors.transpose() * breg * r.vectors - Matrix::Identity(d, d))
                        .cwiseAbs()
                        .maxCoeff());
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ref(a, breg);
    const Vector expected = ref.eigenvalues().reverse();
    const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
    worst_oracle = std::max(
        worst_oracle, (expected - r.values).cwiseAbs().maxCoeff() / scale);
  }
  Outcome out;
  out.passed = worst_residual <= 1e-7 && worst_orth <= 1e-8 && worst_oracle <= 1e-8;
  out.detail = Fmt("100 problems d<=8, residual/|A| %.2g, eigenvalue gap %.2g, "
                   "orthonormality %.2g",
                   worst_residual, worst_oracle, worst_orth);
  return out;
}

Outcome LaplacianAlgebra() {
  Rng rng(32);
  double worst = 0.0;
  auto track = [&](double v) { worst = std::max(worst, v); };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 20;
    std::uniform_int_distribution<int> cls(0, trial % 4);
    std::vector<int> y(n);
    for (auto& v : y) v = cls(rng);
    const ClassPartition part = MakePartition(y);
    const Matrix lc = CenteringLaplacian(n);
    const Matrix lw = WithinClassLaplacian(part);
    const Matrix lb = BetweenClassLaplacian(part);
    for (const Matrix* l : {&lc, &lw, &lb}) {
      track(l->rowwise().sum().cwiseAbs().maxCoeff());
      track((*l - l->transpose()).cwiseAbs().maxCoeff());
    }
    track((lc * lc - lc).cwiseAbs().maxCoeff());
    track((lw * lw - lw).cwiseAbs().maxCoeff());
    const std::vector<int> single(n, 5);
    track(BetweenClassLaplacian(MakePartition(single)).cwiseAbs().maxCoeff());
  }
  Matrix expected(2, 2);
  expected << 2, -2, -2, 2;
  const std::vector<int> two = {0, 1};
  track((BetweenClassLaplacian(MakePartition(two)) - expected).cwiseAbs().maxCoeff());
  Outcome out;
  out.passed = worst <= 1e-10;
  out.detail = Fmt("100 random partitions, worst deviation %.2g", worst);
  return out;
}

Outcome MetricOracles() {
  Rng rng(33);
  int tau_mismatch = 0, map_mismatch = 0;
  double auc_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 49);
    std::uniform_int_distribution<int> level(1, 1 + trial % 9);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = level(rng);
    for (auto& v : b) v = level(rng);
    if (KendallTau(a, b) != oracle::KendallTauB(a, b)) ++tau_mismatch;

    std::bernoulli_distribution rel(0.3);
    std::vector<int> r(n);
    for (auto& v : r) v = rel(rng);
    const int k = 1 + static_cast<int>(rng() % 60);
    const double ap = oracle::AveragePrecision(a, r, k);
    const MapResult m = MapAtK(std::vector<QueryGroup>{QueryGroup{a, r}}, k);
    if (m.map != (ap >= 0.0 ? ap : 0.0) || m.evaluated_queries != (ap >= 0.0 ? 1 : 0)) {
      ++map_mismatch;
    }

    r[0] = 1;
    r[1] = 0;
    const double auc = AreaUnderCurve(Curve(a, r, CurveKind::kRoc));
    auc_gap = std::max(auc_gap, std::abs(auc - oracle::MannWhitneyAuc(a, r)));
  }
  Outcome out;
  out.passed = tau_mismatch == 0 && map_mismatch == 0 && auc_gap <= 1e-12;
  out.detail = Fmt("100 instances, tau mismatches %d, MAP mismatches %d, AUC gap %.2g",
                   tau_mismatch, map_mismatch, auc_gap);
  return out;
}

struct TrainedModel {
  ModelKind kind;
  RankModel model;
  EvaluationMetrics metrics;
};

EvaluationMetrics EvaluateProbabilities(const PreparedData& data, const Vector& p) {
  return Evaluate(PredictionRows(data.test, data.test_pairs, p));
}

Outcome Benchmark(const PreparedData& data, std::vector<TrainedModel>& trained) {
  const auto start = Clock::now();
  const ConcatBaseline baseline = FitConcatBaseline(data.train_pairs, 0.5, 300);
  const EvaluationMetrics base =
      EvaluateProbabilities(data, baseline.Predict(data.test_pairs));
  std::map<ModelKind, EvaluationMetrics> by_kind;
  for (ModelKind kind : {ModelKind::kMvCCAE, ModelKind::kMvMDAE, ModelKind::kDMvDR}) {
    TrainResult r = TrainModel(kind, data.train_pairs, TopologyPreset("desk", kind),
                               DefaultTrainConfig(kind));
    const Prediction p = Predict(r.model, AllViews(data.test_pairs));
    const EvaluationMetrics m = EvaluateProbabilities(data, p.probabilities);
    spdlog::info("{}: tau {:.4f} accuracy {:.4f} map@100 {:.4f}", ModelKindName(kind),
                 m.kendall_tau, m.accuracy, m.map_at_100);
    by_kind[kind] = m;
    trained.push_back({kind, std::move(r.model), m});
  }
  const double secs = Seconds(start);
  const EvaluationMetrics& dmvdr = by_kind[ModelKind::kDMvDR];
  const EvaluationMetrics& mvmdae = by_kind[ModelKind::kMvMDAE];
  const EvaluationMetrics& mvccae = by_kind[ModelKind::kMvCCAE];
  const double margin = 0.02;
  const bool beats = dmvdr.accuracy >= base.accuracy + margin &&
                     mvmdae.accuracy >= base.accuracy + margin &&
                     mvccae.accuracy >= base.accuracy + margin;
  Outcome out;
  out.passed = dmvdr.kendall_tau >= 0.80 && dmvdr.accuracy >= 0.85 &&
               mvmdae.accuracy >= 0.80 && beats && secs < 300.0;
  out.detail = Fmt("DMvDR tau %.4f acc %.4f, MvMDAE acc %.4f, MvCCAE acc %.4f, "
                   "baseline acc %.4f (needs +%.2f: %s), %.0f s",
                   dmvdr.kendall_tau, dmvdr.accuracy, mvmdae.accuracy, mvccae.accuracy,
                   base.accuracy, margin, beats ? "met" : "not met", secs);
  return out;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Determinism() {
  testing::TempDir dir("acceptance_det");
  const fs::path data = dir.path() / "data";
  if (RunCli({"-q", "synth", "--out", data.string()}) != 0) {
    return {false, "synth failed"};
  }
  const std::string manifest = (data / "manifest.json").string();
  // The evaluate command echoes its metrics; keep this report to one line.
  std::ostringstream sink;
  std::streambuf* const previous = std::cout.rdbuf(sink.rdbuf());
  struct Restore {
    std::streambuf* buf;
    ~Restore() { std::cout.rdbuf(buf); }
  } restore{previous};
  std::vector<std::string> models, metrics;
  for (const std::string run : {"a", "b"}) {
    const fs::path root = dir.path() / run;
    const std::string model = (root / "model.json").string();
    const std::string pred = (root / "pred").string();
    if (RunCli({"-q", "train", "--manifest", manifest, "--method", "dmvdr", "--model",
                model}) != 0 ||
        RunCli({"-q", "predict", "--manifest", manifest, "--model", model, "--out",
                pred}) != 0 ||
        RunCli({"-q", "evaluate", "--predictions", pred + "/predictions.csv", "--out",
                pred}) != 0) {
      return {false, "run " + run + " failed"};
    }
    models.push_back(ReadFile(model));
    metrics.push_back(ReadFile(fs::path(pred) / "metrics.json"));
  }
  Outcome out;
  out.passed = !models[0].empty() && models[0] == models[1] && metrics[0] == metrics[1];
  out.detail = Fmt("model files %s (%zu bytes), metrics %s",
                   models[0] == models[1] ? "identical" : "differ", models[0].size(),
                   metrics[0] == metrics[1] ? "identical" : "differ");
  return out;
}

Outcome SingleViewPrediction(const PreparedData& data,
                             const std::vector<TrainedModel>& trained) {
  Outcome out;
  std::string detail;
  for (const TrainedModel& t : trained) {
    if (t.kind == ModelKind::kMvCCAE) continue;
    for (int v = 0; v < t.model.view_count(); ++v) {
      std::vector<std::optional<Matrix>> views(t.model.view_count());
      views[v] = data.test_pairs.features[v];
      try {
        const Prediction p = Predict(t.model, views);
        const EvaluationMetrics m = EvaluateProbabilities(data, p.probabilities);
        const double drop = t.metrics.kendall_tau - m.kendall_tau;
        spdlog::info("{} view {} only: tau {:.4f}, drop {:.4f}", ModelKindName(t.kind),
                     v + 1, m.kendall_tau, drop);
        if (!std::isfinite(drop)) out.passed = false;
        detail += Fmt("%s%s v%d drop %.3f", detail.empty() ? "" : ", ",
                      ModelKindName(t.kind), v + 1, drop);
      } catch (const std::exception& e) {
        out.passed = false;
        detail += Fmt("%s%s v%d error: %s", detail.empty() ? "" : ", ",
                      ModelKindName(t.kind), v + 1, e.what());
      }
    }
  }
  out.detail = detail;
  return out;
}

int Main() {
  spdlog::set_level(spdlog::level::info);
  int failures = 0;
  auto report = [&](const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  };

  report("gradient suite", GradientSuite);
  report("eigen suite", EigenSuite);
  report("laplacian algebra", LaplacianAlgebra);
  report("metric oracles", MetricOracles);

  const PreparedData data = PrepareData(SynthGenerate(DefaultSynthSpec()), SplitConfig{});
  std::vector<TrainedModel> trained;
  report("synthetic benchmark", [&] { return Benchmark(data, trained); });
  report("determinism", Determinism);
  report("single-view prediction", [&] {
    if (trained.empty()) return Outcome{false, "no trained models"};
    return SingleViewPrediction(data, trained);
  });
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace mvrank

int main() { return mvrank::Main(); }
