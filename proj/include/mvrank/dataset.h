// CSV ingestion, dataset manifests and feature standardization.

#ifndef MVRANK_DATASET_H_
#define MVRANK_DATASET_H_

#include <filesystem>
#include <string>
#include <vector>

#include "mvrank/netcore.h"
#include "mvrank/pairdata.h"

namespace mvrank {

struct ManifestView {
  int view_id = 0;
  std::string csv_path;  // relative paths resolve against the manifest's dir
  std::string key_column;
  std::string rank_column;
};

struct DatasetManifest {
  std::string name;
  std::string notes;
  std::vector<ManifestView> views;

  // Throws ManifestError: fewer than two views, duplicate paths or empty
  // column names.
  void Validate() const;
};

DatasetManifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

// Raw rows of a CSV file with a header. Quoted fields may contain commas
// and doubled quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable ReadCsv(const std::filesystem::path& path);

// Reads one view. Columns whose first cell is not numeric are treated as
// categorical and dropped; a later non-numeric cell in a kept column is a
// ParseError naming the row and column. Duplicate keys keep their first row.
RankedView LoadView(const std::filesystem::path& csv_path,
                    const std::string& key_column,
                    const std::string& rank_column, int view_id);

// Loads every view of a manifest (unaligned).
std::vector<RankedView> LoadViews(const DatasetManifest& manifest,
                                  const std::filesystem::path& base_dir);

// Writes key, rank and f1..fd columns with round-trip precision.
void WriteView(const RankedView& view, const std::filesystem::path& path,
               const std::string& key_column = "key",
               const std::string& rank_column = "rank");

struct Standardization {
  Vector means;
  Vector stds;  // population std; 1 for zero-variance columns
};

struct StandardizedMatrix {
  Matrix values;
  Standardization stats;
};

// Per-column zero mean, unit population std. Needs at least two rows.
StandardizedMatrix Standardize(const Matrix& x);
Matrix ApplyStandardization(const Matrix& x, const Standardization& stats);

}  // namespace mvrank

#endif  // MVRANK_DATASET_H_
