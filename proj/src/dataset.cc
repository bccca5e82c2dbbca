#include "mvrank/dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "mvrank/errors.h"

namespace mvrank {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line, size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool ParseNumber(const std::string& raw, double& out) {
  const std::string s = Trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

int ColumnIndex(const CsvTable& t, const std::string& name,
                const std::filesystem::path& path) {
  for (size_t c = 0; c < t.header.size(); ++c) {
    if (Trim(t.header[c]) == name) return static_cast<int>(c);
  }
  throw ManifestError(path.string() + ": missing column '" + name + "'");
}

std::string FormatDouble(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string QuoteIfNeeded(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void DatasetManifest::Validate() const {
  if (views.size() < 2) {
    throw ManifestError("manifest '" + name + "' needs at least two views");
  }
  std::set<std::string> paths;
  for (const auto& v : views) {
    if (v.csv_path.empty() || v.key_column.empty() || v.rank_column.empty()) {
      throw ManifestError("manifest view " + std::to_string(v.view_id) +
                          " has an empty path or column name");
    }
    if (!paths.insert(v.csv_path).second) {
      throw ManifestError("manifest lists '" + v.csv_path + "' twice");
    }
  }
}

DatasetManifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  DatasetManifest m;
  try {
    m.name = j.value("name", "");
    m.notes = j.value("notes", "");
    for (const auto& v : j.at("views")) {
      ManifestView mv;
      mv.view_id = v.at("view_id").get<int>();
      mv.csv_path = v.at("csv_path").get<std::string>();
      mv.key_column = v.at("key_column").get<std::string>();
      mv.rank_column = v.at("rank_column").get<std::string>();
      m.views.push_back(std::move(mv));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("manifest " + path.string() + ": " + e.what());
  }
  m.Validate();
  return m;
}

void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
  nlohmann::json j;
  j["name"] = manifest.name;
  j["notes"] = manifest.notes;
  j["views"] = nlohmann::json::array();
  for (const auto& v : manifest.views) {
    j["views"].push_back({{"view_id", v.view_id},
                          {"csv_path", v.csv_path},
                          {"key_column", v.key_column},
                          {"rank_column", v.rank_column}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto fields = SplitCsvLine(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) +
                       ": " + std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw ParseError(path.string() + ": empty file");
  return t;
}

RankedView LoadView(const std::filesystem::path& csv_path,
                    const std::string& key_column,
                    const std::string& rank_column, int view_id) {
  const CsvTable t = ReadCsv(csv_path);
  const int key_col = ColumnIndex(t, key_column, csv_path);
  const int rank_col = ColumnIndex(t, rank_column, csv_path);
  if (t.rows.empty()) throw DataError(csv_path.string() + ": no data rows");

  std::vector<int> kept;
  std::vector<std::string> dropped;
  for (int c = 0; c < static_cast<int>(t.header.size()); ++c) {
    if (c == key_col || c == rank_col) continue;
    double probe;
    if (ParseNumber(t.rows.front()[c], probe)) {
      kept.push_back(c);
    } else {
      dropped.push_back(Trim(t.header[c]));
    }
  }
  if (!dropped.empty()) {
    std::string list;
    for (const auto& d : dropped) list += (list.empty() ? "" : ", ") + d;
    spdlog::info("{}: dropping categorical columns [{}]", csv_path.string(), list);
  }

  RankedView view;
  view.view_id = view_id;
  std::unordered_set<std::string> seen;
  std::vector<std::vector<double>> rows;
  std::vector<double> ranks;
  int duplicates = 0;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string key = Trim(row[key_col]);
    if (!seen.insert(key).second) {
      ++duplicates;
      continue;
    }
    double rank;
    if (!ParseNumber(row[rank_col], rank) || !(rank > 0.0)) {
      throw ParseError(csv_path.string() + " row " + std::to_string(r + 1) +
                       ", column '" + rank_column + "': rank must be a positive number");
    }
    std::vector<double> values;
    values.reserve(kept.size());
    for (int c : kept) {
      double v;
      if (!ParseNumber(row[c], v)) {
        throw ParseError(csv_path.string() + " row " + std::to_string(r + 1) +
                         ", column '" + Trim(t.header[c]) + "': non-numeric value '" +
                         row[c] + "'");
      }
      values.push_back(v);
    }
    view.keys.push_back(key);
    ranks.push_back(rank);
    rows.push_back(std::move(values));
  }
  if (duplicates > 0) {
    spdlog::warn("{}: {} duplicate keys ignored (first occurrence kept)",
                 csv_path.string(), duplicates);
  }
  view.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(kept.size()));
  view.ranks.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < kept.size(); ++c) view.features(r, c) = rows[r][c];
    view.ranks(r) = ranks[r];
  }
  return view;
}

std::vector<RankedView> LoadViews(const DatasetManifest& manifest,
                                  const std::filesystem::path& base_dir) {
  manifest.Validate();
  std::vector<RankedView> views;
  for (const auto& mv : manifest.views) {
    std::filesystem::path p(mv.csv_path);
    if (p.is_relative()) p = base_dir / p;
    views.push_back(LoadView(p, mv.key_column, mv.rank_column, mv.view_id));
  }
  return views;
}

void WriteView(const RankedView& view, const std::filesystem::path& path,
               const std::string& key_column, const std::string& rank_column) {
  view.Validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << key_column << "," << rank_column;
  for (Eigen::Index c = 0; c < view.features.cols(); ++c) out << ",f" << (c + 1);
  out << "\n";
  for (int r = 0; r < view.size(); ++r) {
    out << QuoteIfNeeded(view.keys[r]) << "," << FormatDouble(view.ranks(r));
    for (Eigen::Index c = 0; c < view.features.cols(); ++c) {
      out << "," << FormatDouble(view.features(r, c));
    }
    out << "\n";
  }
}

StandardizedMatrix Standardize(const Matrix& x) {
  if (x.rows() < 2) throw InputError("standardization needs at least two rows");
  StandardizedMatrix out;
  out.stats.means = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - out.stats.means.transpose();
  out.stats.stds =
      (centered.colwise().squaredNorm() / static_cast<double>(x.rows()))
          .cwiseSqrt()
          .transpose();
  for (Eigen::Index c = 0; c < out.stats.stds.size(); ++c) {
    if (!(out.stats.stds(c) > 1e-12)) out.stats.stds(c) = 1.0;
  }
  out.values = ApplyStandardization(x, out.stats);
  return out;
}

Matrix ApplyStandardization(const Matrix& x, const Standardization& stats) {
  if (x.cols() != stats.means.size() || x.cols() != stats.stds.size()) {
    throw ShapeError("standardization stats cover " +
                     std::to_string(stats.means.size()) + " columns, matrix has " +
                     std::to_string(x.cols()));
  }
  Matrix out = x.rowwise() - stats.means.transpose();
  return out.array().rowwise() / stats.stds.transpose().array();
}

}  // namespace mvrank
