// Python module mvrank._core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mvrank/cli.h"
#include "mvrank/errors.h"
#include "mvrank/experiment.h"
#include "mvrank/gradcheck.h"
#include "mvrank/metrics.h"
#include "mvrank/model_io.h"
#include "mvrank/models.h"
#include "mvrank/synth.h"

namespace py = pybind11;

namespace mvrank {
namespace {

py::dict MetricsDict(const EvaluationMetrics& m) {
  py::dict d;
  d["kendall_tau"] = m.kendall_tau;
  d["accuracy"] = m.accuracy;
  d["map_at_100"] = m.map_at_100;
  d["roc_auc"] = m.roc_auc ? py::cast(*m.roc_auc) : py::none();
  d["n_pairs"] = m.n_pairs;
  d["excluded_queries"] = m.excluded_queries;
  return d;
}

TrainConfig ConfigFor(const std::string& method, py::kwargs overrides) {
  TrainConfig cfg = DefaultTrainConfig(ParseModelKind(method));
  for (auto item : overrides) {
    const std::string key = py::cast<std::string>(item.first);
    py::handle v = item.second;
    if (key == "alpha") cfg.alpha = v.cast<double>();
    else if (key == "beta") cfg.beta = v.cast<double>();
    else if (key == "rho") cfg.rho = v.cast<double>();
    else if (key == "learning_rate") cfg.learning_rate = v.cast<double>();
    else if (key == "epochs") cfg.epochs = v.cast<int>();
    else if (key == "batch_size") cfg.batch_size = v.cast<int>();
    else if (key == "subspace_dim") cfg.subspace_dim = v.cast<int>();
    else if (key == "seed") cfg.seed = v.cast<std::uint64_t>();
    else if (key == "scorer_learning_rate") cfg.scorer_learning_rate = v.cast<double>();
    else if (key == "scorer_epochs") cfg.scorer_epochs = v.cast<int>();
    else if (key == "eigen_eps") cfg.eigen_eps = v.cast<double>();
    else throw InputError("unknown training option '" + key + "'");
  }
  cfg.Validate();
  return cfg;
}

}  // namespace
}  // namespace mvrank

PYBIND11_MODULE(_core, m) {
  using namespace mvrank;
  m.doc() = "Multi-view learning to rank: MvCCAE, MvMDAE and DMvDR.";

  static py::exception<Error> base_error(m, "MvrankError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(base_error, e.what());
    }
  });

  py::class_<RankedView>(m, "RankedView")
      .def(py::init<>())
      .def_readwrite("view_id", &RankedView::view_id)
      .def_readwrite("keys", &RankedView::keys)
      .def_readwrite("features", &RankedView::features)
      .def_readwrite("ranks", &RankedView::ranks)
      .def("__len__", &RankedView::size);

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init(&DefaultSynthSpec))
      .def_readwrite("views", &SynthSpec::views)
      .def_readwrite("samples", &SynthSpec::samples)
      .def_readwrite("view_dims", &SynthSpec::view_dims)
      .def_readwrite("latent_dim", &SynthSpec::latent_dim)
      .def_readwrite("noise_sigma", &SynthSpec::noise_sigma)
      .def_readwrite("seed", &SynthSpec::seed)
      .def_property(
          "sigmoid",
          [](const SynthSpec& s) { return s.nonlinearity == SynthNonlinearity::kSigmoid; },
          [](SynthSpec& s, bool on) {
            s.nonlinearity = on ? SynthNonlinearity::kSigmoid : SynthNonlinearity::kLinear;
          });
  m.def("synth_generate", &SynthGenerate, py::arg("spec") = DefaultSynthSpec(),
        "Seeded synthetic ranked views.");

  py::class_<PairDataset>(m, "PairDataset")
      .def_readonly("features", &PairDataset::features)
      .def_readonly("joint_labels", &PairDataset::joint_labels)
      .def_readonly("view_labels", &PairDataset::view_labels)
      .def_readonly("query_of_pair", &PairDataset::query_of_pair)
      .def_readonly("item_of_pair", &PairDataset::item_of_pair)
      .def("__len__", &PairDataset::size);

  py::class_<PreparedData>(m, "PreparedData")
      .def_readonly("train_pairs", &PreparedData::train_pairs)
      .def_readonly("test_pairs", &PreparedData::test_pairs)
      .def_property_readonly("train_keys",
                             [](const PreparedData& d) { return d.train.keys(); })
      .def_property_readonly("test_keys",
                             [](const PreparedData& d) { return d.test.keys(); });
  m.def(
      "prepare_data",
      [](const std::vector<RankedView>& views, double test_fraction, std::uint64_t seed,
         std::optional<int> pairs_per_query) {
        SplitConfig split;
        split.test_fraction = test_fraction;
        split.seed = seed;
        split.pairs_per_query = pairs_per_query;
        return PrepareData(views, split);
      },
      py::arg("views"), py::arg("test_fraction") = 0.2, py::arg("seed") = 42,
      py::arg("pairs_per_query") = std::nullopt,
      "Align, split, standardize and build train/test pair sets.");

  py::class_<RankModel>(m, "RankModel")
      .def_property_readonly("method", [](const RankModel& r) { return ModelKindName(r.kind); })
      .def_property_readonly("view_count", &RankModel::view_count)
      .def_property_readonly("subspace_dim", [](const RankModel& r) { return r.projection.dim; })
      .def("to_json", [](const RankModel& r) { return SerializeModel(r); })
      .def("save", [](const RankModel& r, const std::filesystem::path& p) { SaveModel(r, p); },
           py::arg("path"));
  m.def("load_model", &LoadModel, py::arg("path"));
  m.def("model_from_json", [](const std::string& text) { return DeserializeModel(text).model; },
        py::arg("text"));

  m.def(
      "train",
      [](const std::string& method, const PairDataset& pairs, const std::string& topology,
         py::kwargs overrides) {
        const ModelKind kind = ParseModelKind(method);
        const TrainConfig cfg = ConfigFor(method, overrides);
        py::gil_scoped_release release;
        return TrainModel(kind, pairs, TopologyPreset(topology, kind), cfg).model;
      },
      py::arg("method"), py::arg("pairs"), py::arg("topology") = "desk",
      "Train a model. Keyword arguments override the per-method defaults "
      "(alpha, beta, rho, learning_rate, epochs, batch_size, subspace_dim, seed, ...).");

  m.def(
      "predict",
      [](const RankModel& model, const std::vector<std::optional<Matrix>>& views) {
        return Predict(model, views).probabilities;
      },
      py::arg("model"), py::arg("views"),
      "Pair probabilities. Pass None for unavailable views; one view alone is allowed.");

  m.def(
      "evaluate",
      [](const PreparedData& data, const Vector& probabilities) {
        return MetricsDict(
            Evaluate(PredictionRows(data.test, data.test_pairs, probabilities)));
      },
      py::arg("data"), py::arg("probabilities"),
      "Held-out metrics for probabilities over data.test_pairs.");

  m.def(
      "baseline_probabilities",
      [](const PairDataset& train, const PairDataset& test) {
        return FitConcatBaseline(train, 0.5, 300).Predict(test);
      },
      py::arg("train_pairs"), py::arg("test_pairs"),
      "Logistic regression on concatenated raw pair features.");

  m.def(
      "kendall_tau",
      [](const std::vector<double>& a, const std::vector<double>& b) { return KendallTau(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "map_at_k",
      [](const std::vector<std::pair<std::vector<double>, std::vector<int>>>& groups, int k) {
        std::vector<QueryGroup> g;
        for (const auto& [scores, relevance] : groups) g.push_back({scores, relevance});
        return MapAtK(g, k).map;
      },
      py::arg("groups"), py::arg("k") = 100,
      "Mean average precision over (scores, relevance) query groups.");
  m.def(
      "roc_auc",
      [](const std::vector<double>& p, const std::vector<int>& y) {
        return AreaUnderCurve(Curve(p, y, CurveKind::kRoc));
      },
      py::arg("probabilities"), py::arg("labels"));

  m.def(
      "gradcheck",
      [](int instances, std::uint64_t seed) {
        py::dict out;
        for (const auto& r : RunAllGradChecks(instances, seed)) {
          out[py::str(r.name)] = py::make_tuple(r.passed(), r.max_rel_error, r.tolerance);
        }
        return out;
      },
      py::arg("instances") = 20, py::arg("seed") = 1,
      "Finite-difference checks: {suite: (passed, max_rel_error, tolerance)}.");

  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return RunCli(args); },
      py::arg("args"), "Run the command-line tool in process; returns the exit code.");
}
