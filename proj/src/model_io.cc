#include "mvrank/model_io.h"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvrank/errors.h"

namespace mvrank {
namespace {

using json = nlohmann::ordered_json;

json MatrixToJson(const Matrix& m) {
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix MatrixFromJson(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ParseError("matrix payload does not match its shape");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  }
  return m;
}

json VectorToJson(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector VectorFromJson(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

json NetworkToJson(const MlpNetwork& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"activation", ActivationName(l.activation)},
                      {"weight", MatrixToJson(l.weight)},
                      {"bias", VectorToJson(l.bias)}});
  }
  return json{{"name", net.name}, {"layers", layers}};
}

MlpNetwork NetworkFromJson(const json& j) {
  MlpNetwork net;
  net.name = j.at("name").get<std::string>();
  for (const auto& l : j.at("layers")) {
    DenseLayer layer;
    layer.activation = ParseActivation(l.at("activation").get<std::string>());
    layer.weight = MatrixFromJson(l.at("weight"));
    layer.bias = VectorFromJson(l.at("bias"));
    net.layers.push_back(std::move(layer));
  }
  net.Validate();
  return net;
}

json LayerSpecsToJson(const std::vector<LayerSpec>& specs) {
  json out = json::array();
  for (const auto& s : specs) {
    out.push_back({{"units", s.units}, {"activation", ActivationName(s.activation)}});
  }
  return out;
}

json ConfigToJson(const TrainConfig& c) {
  json j{{"alpha", c.alpha},
         {"beta", c.beta},
         {"rho", c.rho},
         {"learning_rate", c.learning_rate},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"subspace_dim", c.subspace_dim},
         {"seed", c.seed},
         {"scorer_learning_rate", c.scorer_learning_rate},
         {"scorer_epochs", c.scorer_epochs}};
  j["eigen_eps"] = c.eigen_eps.has_value() ? json(*c.eigen_eps) : json(nullptr);
  return j;
}

TrainConfig ConfigFromJson(const json& j) {
  TrainConfig c;
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  c.rho = j.at("rho").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.subspace_dim = j.at("subspace_dim").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.scorer_learning_rate = j.at("scorer_learning_rate").get<double>();
  c.scorer_epochs = j.at("scorer_epochs").get<int>();
  if (!j.at("eigen_eps").is_null()) c.eigen_eps = j.at("eigen_eps").get<double>();
  return c;
}

}  // namespace

std::string SerializeModel(const RankModel& model, const ModelMetadata& metadata) {
  model.Validate();
  json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = ModelKindName(model.kind);
  j["seed"] = model.config.seed;
  j["config"] = ConfigToJson(model.config);
  j["topology"] = {
      {"encoder", LayerSpecsToJson(model.topology.encoder)},
      {"decoder_hidden", model.topology.decoder_hidden},
      {"fused_hidden", model.topology.fused_hidden},
      {"reconstruction_activation",
       ActivationName(model.topology.reconstruction_activation)}};
  j["encoders"] = json::array();
  j["decoders"] = json::array();
  for (int v = 0; v < model.view_count(); ++v) {
    j["encoders"].push_back(NetworkToJson(model.encoders[v]));
    j["decoders"].push_back(NetworkToJson(model.decoders[v]));
  }
  j["fused"] = model.fused.has_value() ? NetworkToJson(*model.fused) : json(nullptr);
  json blocks = json::array();
  for (const auto& w : model.projection.view_weights) blocks.push_back(MatrixToJson(w));
  j["projection"] = {{"dim", model.projection.dim},
                     {"eigenvalues", VectorToJson(model.projection.eigenvalues)},
                     {"view_weights", blocks}};
  j["scorer"] = model.scorer.has_value()
                    ? json{{"weights", VectorToJson(model.scorer->weights)},
                           {"bias", model.scorer->bias},
                           {"center", VectorToJson(model.scorer->center)}}
                    : json(nullptr);

  json meta;
  meta["source"] = metadata.source;
  json stats = json::array();
  for (const auto& s : metadata.standardization) {
    stats.push_back({{"means", VectorToJson(s.means)}, {"stds", VectorToJson(s.stds)}});
  }
  meta["standardization"] = stats;
  if (metadata.split.has_value()) {
    meta["split"] = {{"test_fraction", metadata.split->test_fraction},
                     {"seed", metadata.split->seed}};
    meta["split"]["pairs_per_query"] =
        metadata.split->pairs_per_query.has_value()
            ? json(*metadata.split->pairs_per_query)
            : json(nullptr);
  } else {
    meta["split"] = nullptr;
  }
  j["metadata"] = meta;
  return j.dump(1) + "\n";
}

ModelFile DeserializeModel(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ParseError("model file is empty");
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format_version")) {
    throw ParseError("model file has no format_version");
  }
  if (!j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != kModelFormatVersion) {
    throw FormatVersionError("model file format_version " +
                             j.at("format_version").dump() +
                             " is not supported (expected " +
                             std::to_string(kModelFormatVersion) + ")");
  }
  ModelFile out;
  try {
    RankModel& m = out.model;
    m.kind = ParseModelKind(j.at("kind").get<std::string>());
    m.config = ConfigFromJson(j.at("config"));
    const json& topo = j.at("topology");
    for (const auto& s : topo.at("encoder")) {
      m.topology.encoder.push_back(
          {s.at("units").get<int>(),
           ParseActivation(s.at("activation").get<std::string>())});
    }
    m.topology.decoder_hidden = topo.at("decoder_hidden").get<std::vector<int>>();
    m.topology.fused_hidden = topo.at("fused_hidden").get<std::vector<int>>();
    m.topology.reconstruction_activation =
        ParseActivation(topo.at("reconstruction_activation").get<std::string>());
    for (const auto& n : j.at("encoders")) m.encoders.push_back(NetworkFromJson(n));
    for (const auto& n : j.at("decoders")) m.decoders.push_back(NetworkFromJson(n));
    if (!j.at("fused").is_null()) m.fused = NetworkFromJson(j.at("fused"));
    const json& proj = j.at("projection");
    m.projection.dim = proj.at("dim").get<int>();
    m.projection.eigenvalues = VectorFromJson(proj.at("eigenvalues"));
    for (const auto& w : proj.at("view_weights")) {
      m.projection.view_weights.push_back(MatrixFromJson(w));
    }
    if (!j.at("scorer").is_null()) {
      ScoringFunction s;
      s.weights = VectorFromJson(j.at("scorer").at("weights"));
      s.bias = j.at("scorer").at("bias").get<double>();
      s.center = VectorFromJson(j.at("scorer").at("center"));
      m.scorer = std::move(s);
    }
    m.config.Validate();
    m.Validate();

    const json& meta = j.at("metadata");
    out.metadata.source = meta.at("source").get<std::string>();
    for (const auto& s : meta.at("standardization")) {
      out.metadata.standardization.push_back(
          {VectorFromJson(s.at("means")), VectorFromJson(s.at("stds"))});
    }
    if (!meta.at("split").is_null()) {
      SplitConfig split;
      split.test_fraction = meta.at("split").at("test_fraction").get<double>();
      split.seed = meta.at("split").at("seed").get<std::uint64_t>();
      if (!meta.at("split").at("pairs_per_query").is_null()) {
        split.pairs_per_query = meta.at("split").at("pairs_per_query").get<int>();
      }
      out.metadata.split = split;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is malformed: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(std::string("model file is inconsistent: ") + e.what());
  } catch (const InputError& e) {
    throw ParseError(std::string("model file is inconsistent: ") + e.what());
  }
  return out;
}

void SaveModel(const RankModel& model, const std::filesystem::path& path,
               const ModelMetadata& metadata) {
  const std::string text = SerializeModel(model, metadata);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << text;
}

ModelFile LoadModelFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return DeserializeModel(buf.str());
}

RankModel LoadModel(const std::filesystem::path& path) {
  return LoadModelFile(path).model;
}

}  // namespace mvrank
