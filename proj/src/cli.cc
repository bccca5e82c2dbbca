#include "mvrank/cli.h"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mvrank/dataset.h"
#include "mvrank/errors.h"
#include "mvrank/experiment.h"
#include "mvrank/gradcheck.h"
#include "mvrank/model_io.h"
#include "mvrank/models.h"
#include "mvrank/synth.h"

namespace mvrank {
namespace {

namespace fs = std::filesystem;

struct DataSource {
  std::string manifest;
  std::string synth;
};

void AddDataOptions(CLI::App* cmd, DataSource& src) {
  auto* m = cmd->add_option("--manifest", src.manifest, "Dataset manifest JSON");
  auto* s = cmd->add_option("--synth", src.synth,
                            "Synthetic spec: 'default' or a spec JSON path");
  m->excludes(s);
  s->excludes(m);
}

struct LoadedData {
  std::vector<RankedView> views;
  std::string description;
};

LoadedData LoadData(const DataSource& src) {
  LoadedData out;
  if (!src.manifest.empty()) {
    const fs::path path(src.manifest);
    const DatasetManifest manifest = ReadManifest(path);
    out.views = LoadViews(manifest, path.parent_path());
    out.description = "manifest:" + manifest.name;
  } else if (!src.synth.empty()) {
    const SynthSpec spec =
        src.synth == "default" ? DefaultSynthSpec() : ReadSynthSpec(src.synth);
    out.views = SynthGenerate(spec);
    out.description = "synth:" + src.synth;
  } else {
    throw InputError("one of --manifest or --synth is required");
  }
  return out;
}

struct TrainOptions {
  DataSource data;
  std::string method = "dmvdr";
  std::string topology = "desk";
  // Unset values take the per-method defaults.
  std::optional<double> alpha, beta, rho, learning_rate;
  std::optional<int> epochs, batch_size, subspace_dim;
  std::uint64_t seed = 42;
  SplitConfig split;
  int pairs_per_query = 0;
  std::string model_path;
  std::string out_dir;
};

int RunTrain(const TrainOptions& o) {
  const ModelKind kind = ParseModelKind(o.method);
  SplitConfig split = o.split;
  if (o.pairs_per_query > 0) split.pairs_per_query = o.pairs_per_query;
  TrainConfig cfg = DefaultTrainConfig(kind);
  cfg.alpha = o.alpha.value_or(cfg.alpha);
  cfg.beta = o.beta.value_or(cfg.beta);
  cfg.rho = o.rho.value_or(cfg.rho);
  cfg.learning_rate = o.learning_rate.value_or(cfg.learning_rate);
  cfg.epochs = o.epochs.value_or(cfg.epochs);
  cfg.batch_size = o.batch_size.value_or(cfg.batch_size);
  cfg.subspace_dim = o.subspace_dim.value_or(cfg.subspace_dim);
  cfg.seed = o.seed;
  cfg.Validate();

  const LoadedData data = LoadData(o.data);
  const PreparedData prepared = PrepareData(data.views, split);
  spdlog::info("{} training pairs from {} samples, {} test samples",
               prepared.train_pairs.size(), prepared.train.size(),
               prepared.test.size());
  const TrainResult result = TrainModel(kind, prepared.train_pairs,
                                        TopologyPreset(o.topology, kind), cfg);
  for (const auto& e : result.log) {
    spdlog::info("epoch {:3d}  ratio {:.6f}  objective {:.6f}  skipped {}", e.epoch,
                 e.reference_ratio, e.encoder_objective, e.skipped_batches);
  }

  ModelMetadata meta;
  meta.standardization = prepared.stats;
  meta.split = split;
  meta.source = data.description;
  const fs::path model_path(o.model_path);
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  SaveModel(result.model, model_path, meta);

  const fs::path out_dir = o.out_dir.empty()
                               ? (model_path.has_parent_path() ? model_path.parent_path()
                                                               : fs::path("."))
                               : fs::path(o.out_dir);
  fs::create_directories(out_dir);
  WriteTrainingLog(result.log, out_dir / "train_log.csv");
  spdlog::info("wrote {} and {}", model_path.string(),
               (out_dir / "train_log.csv").string());
  return 0;
}

struct PredictOptions {
  DataSource data;
  std::string model_path;
  std::string split = "test";
  int only_view = 0;  // 1-based position, 0 = all views
  std::string out_dir = ".";
};

int RunPredict(const PredictOptions& o) {
  const ModelFile file = LoadModelFile(o.model_path);
  const RankModel& model = file.model;
  const LoadedData data = LoadData(o.data);

  AlignedViews samples;
  PairDataset pairs;
  if (o.split == "all") {
    samples = AlignViews(data.views);
    if (file.metadata.standardization.size() != samples.views.size()) {
      throw DataError("model stores no standardization for these views");
    }
    for (size_t v = 0; v < samples.views.size(); ++v) {
      samples.views[v].features = ApplyStandardization(
          samples.views[v].features, file.metadata.standardization[v]);
    }
    std::vector<int> queries(samples.size());
    for (int i = 0; i < samples.size(); ++i) queries[i] = i;
    pairs = PairwiseTransform(samples, queries);
  } else {
    if (!file.metadata.split.has_value()) {
      throw DataError("model file records no train/test split; use --split all");
    }
    PreparedData prepared = PrepareData(data.views, *file.metadata.split);
    if (o.split == "test") {
      samples = std::move(prepared.test);
      pairs = std::move(prepared.test_pairs);
    } else {
      samples = std::move(prepared.train);
      std::vector<int> queries(samples.size());
      for (int i = 0; i < samples.size(); ++i) queries[i] = i;
      pairs = PairwiseTransform(samples, queries);
    }
  }

  std::vector<std::optional<Matrix>> inputs = AllViews(pairs);
  if (o.only_view > 0) {
    if (o.only_view > static_cast<int>(inputs.size())) {
      throw InputError("--only-view " + std::to_string(o.only_view) +
                       " exceeds the view count " + std::to_string(inputs.size()));
    }
    for (size_t v = 0; v < inputs.size(); ++v) {
      if (static_cast<int>(v) + 1 != o.only_view) inputs[v].reset();
    }
  }
  const Prediction pred = Predict(model, inputs);
  spdlog::info("{} pairs predicted ({})", pairs.size(),
               pred.scenario == PredictionScenario::kFused ? "all views"
                                                           : "single view");
  const fs::path out_dir(o.out_dir);
  fs::create_directories(out_dir);
  WritePredictions(PredictionRows(samples, pairs, pred.probabilities),
                   out_dir / "predictions.csv");
  return 0;
}

int RunEvaluate(const std::string& predictions, const std::string& out_dir) {
  const auto rows = ReadPredictions(predictions);
  const EvaluationMetrics m = Evaluate(rows);
  WriteMetrics(m, out_dir);
  std::cout << MetricsJson(m);
  return 0;
}

int RunSynth(const std::string& spec_arg, const std::string& out) {
  const SynthSpec spec =
      spec_arg == "default" ? DefaultSynthSpec() : ReadSynthSpec(spec_arg);
  const fs::path dir(out);
  fs::create_directories(dir);
  DatasetManifest manifest;
  manifest.name = "synthetic";
  manifest.notes = "generated from synth_spec.json";
  for (const auto& view : SynthGenerate(spec)) {
    const std::string file = "view_" + std::to_string(view.view_id) + ".csv";
    WriteView(view, dir / file);
    manifest.views.push_back({view.view_id, file, "key", "rank"});
  }
  WriteManifest(manifest, dir / "manifest.json");
  WriteSynthSpec(spec, dir / "synth_spec.json");
  spdlog::info("wrote {} views to {}", manifest.views.size(), dir.string());
  return 0;
}

int RunGradCheck(const std::vector<std::string>& suites, int instances,
                 std::uint64_t seed) {
  const std::vector<std::string> names =
      suites.empty() ? GradCheckSuiteNames() : suites;
  bool ok = true;
  for (const auto& name : names) {
    const GradCheckSuiteResult r = RunGradCheckSuite(name, instances, seed);
    std::printf("%-16s %s  instances %d  entries %lld  max rel err %.3e (tol %.0e)  %.2fs\n",
                r.name.c_str(), r.passed() ? "ok  " : "FAIL", r.instances,
                r.entries, r.max_rel_error, r.tolerance, r.seconds);
    ok = ok && r.passed();
  }
  std::fflush(stdout);
  return ok ? 0 : 1;
}

void ConfigureLogging(bool verbose, bool quiet) {
  static const bool configured = [] {
    auto logger = spdlog::stderr_color_mt("mvrank");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)configured;
  spdlog::set_level(quiet     ? spdlog::level::warn
                    : verbose ? spdlog::level::debug
                              : spdlog::level::info);
}

}  // namespace

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Multi-view learning to rank"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  AddDataOptions(train_cmd, train.data);
  train_cmd->add_option("--method", train.method, "mvccae, mvmdae or dmvdr")
      ->check(CLI::IsMember({"mvccae", "mvmdae", "dmvdr"}))
      ->capture_default_str();
  train_cmd->add_option("--topology", train.topology,
                        "desk, university-ae or university-dmvdr")
      ->capture_default_str();
  train_cmd->add_option("--alpha", train.alpha,
                        "Per-view term weight (default 5 for AE models, 0.1 for dmvdr)");
  train_cmd->add_option("--beta", train.beta, "Fused rank loss weight (default 1)");
  train_cmd->add_option("--rho", train.rho, "Encoder L2 penalty (default 1e-4)");
  train_cmd->add_option("--lr", train.learning_rate,
                        "Learning rate (default 0.05 for AE models, 0.5 for dmvdr)");
  train_cmd->add_option("--epochs", train.epochs,
                        "Epochs (default 30 for AE models, 20 for dmvdr)");
  train_cmd->add_option("--batch", train.batch_size, "Batch size (default 200)");
  train_cmd->add_option("--dim", train.subspace_dim,
                        "Subspace dimension (default 8 for AE models, 1 for dmvdr)");
  train_cmd->add_option("--seed", train.seed, "Training seed")->capture_default_str();
  train_cmd->add_option("--split-seed", train.split.seed)->capture_default_str();
  train_cmd->add_option("--test-fraction", train.split.test_fraction)
      ->capture_default_str();
  train_cmd->add_option("--pairs-per-query", train.pairs_per_query,
                        "Cap on training partners per query (0 = all)");
  train_cmd->add_option("--model", train.model_path, "Output model file")->required();
  train_cmd->add_option("--out", train.out_dir,
                        "Directory for train_log.csv (default: model directory)");

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Write pair probabilities");
  AddDataOptions(predict_cmd, predict.data);
  predict_cmd->add_option("--model", predict.model_path)->required();
  predict_cmd->add_option("--split", predict.split)
      ->check(CLI::IsMember({"test", "train", "all"}))
      ->capture_default_str();
  predict_cmd->add_option("--only-view", predict.only_view,
                          "Predict from this view alone (1-based)");
  predict_cmd->add_option("--out", predict.out_dir)->capture_default_str();

  std::string eval_predictions;
  std::string eval_out = ".";
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a predictions file");
  eval_cmd->add_option("--predictions", eval_predictions)->required();
  eval_cmd->add_option("--out", eval_out)->capture_default_str();

  std::string synth_spec = "default";
  std::string synth_out = ".";
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset");
  synth_cmd->add_option("--spec", synth_spec, "'default' or a spec JSON path")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_out)->capture_default_str();

  std::vector<std::string> gc_suites;
  int gc_instances = 20;
  std::uint64_t gc_seed = 1;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suites");
  gc_cmd->add_option("--suite", gc_suites, "Run only these suites");
  gc_cmd->add_option("--instances", gc_instances)->capture_default_str();
  gc_cmd->add_option("--seed", gc_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ConfigureLogging(verbose, quiet);
  try {
    if (*train_cmd) return RunTrain(train);
    if (*predict_cmd) return RunPredict(predict);
    if (*eval_cmd) return RunEvaluate(eval_predictions, eval_out);
    if (*synth_cmd) return RunSynth(synth_spec, synth_out);
    if (*gc_cmd) return RunGradCheck(gc_suites, gc_instances, gc_seed);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 2;
}

int RunCli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"mvrank"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mvrank
