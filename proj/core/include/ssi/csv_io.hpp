#pragma once

#include <set>
#include <string>

#include "ssi/tuning.hpp"
#include "ssi/types.hpp"

namespace ssi {

/// How to read a delimited data file. Missing markers match the full trimmed
/// cell token. The companion schema file has one line per data column:
///   name,kind[,class,class,...]
/// with kind one of response / continuous / discrete (exactly one response).
struct CsvSpec {
  std::string path;
  char delimiter = ',';
  std::set<std::string> missing_markers = {"NA", ""};
  bool header = true;
  std::string schema_path;
};

struct SchemaFile {
  std::vector<ColumnSchema> covariates;
  Index response_position = 0;  // column index of the response in the file
  std::string response_name = "y";

  Index file_columns() const { return static_cast<Index>(covariates.size()) + 1; }
};

SchemaFile load_schema(const std::string& path);

MissingDataset load_csv(const CsvSpec& spec);

/// Writes the dataset (response first, then covariates in schema order) with
/// a version comment line, plus a companion .schema file. Masked entries
/// become the first missing marker.
void save_dataset(const MissingDataset& dataset, const std::string& path,
                  const std::string& y_name = "y", const std::string& missing_marker = "NA");

/// Completed matrix as CSV plus a JSON diagnostics sidecar at path + ".json"
/// (parameters used, per-column solver status, imputed-entry counts).
void save_result(const ImputationResult& result, const MissingDataset& original,
                 const std::string& path, const std::string& y_name = "y");

void save_tune_report(const TuneReport& report, const std::string& path);

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

}  // namespace ssi
