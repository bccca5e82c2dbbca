// Versioned JSON model files.

#ifndef MVRANK_MODEL_IO_H_
#define MVRANK_MODEL_IO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvrank/dataset.h"
#include "mvrank/experiment.h"
#include "mvrank/models.h"

namespace mvrank {

inline constexpr int kModelFormatVersion = 1;

// Everything needed to reproduce the data a model was trained on and to
// preprocess new samples the same way.
struct ModelMetadata {
  std::vector<Standardization> standardization;  // per view, may be empty
  std::optional<SplitConfig> split;
  std::string source;  // free-form description of the training data
};

struct ModelFile {
  RankModel model;
  ModelMetadata metadata;
};

std::string SerializeModel(const RankModel& model,
                           const ModelMetadata& metadata = {});
ModelFile DeserializeModel(const std::string& text);

// Throws ParseError on corrupt content (no partial model is returned) and
// FormatVersionError when format_version is not kModelFormatVersion.
void SaveModel(const RankModel& model, const std::filesystem::path& path,
               const ModelMetadata& metadata = {});
ModelFile LoadModelFile(const std::filesystem::path& path);
RankModel LoadModel(const std::filesystem::path& path);

}  // namespace mvrank

#endif  // MVRANK_MODEL_IO_H_
