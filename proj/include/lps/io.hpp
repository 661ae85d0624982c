#ifndef LPS_IO_HPP
#define LPS_IO_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lps/pipeline.hpp"
#include "lps/types.hpp"

namespace lps {

/// Dichotomization rule for one source column. Exactly one mode applies:
///  - passthrough: cell must already read 0 or 1
///  - threshold:   risky (1) iff value is strictly beyond `cut` in `direction`
///  - categories:  risky (1) iff the cell matches one of the listed strings
struct CutRule {
  enum class Kind { passthrough, threshold, categories } kind = Kind::passthrough;
  double cut = 0.0;
  char direction = '>';  // '>' or '<', strict either way
  std::set<std::string> risky;

  std::string describe() const;
};

struct IngestConfig {
  std::string response;                      // response column name (must read 0/1)
  std::vector<std::pair<std::string, CutRule>> variables;  // cli order is CSV order
};

/// Parse the JSON cutpoint config (see docs/ingest-config.schema.json).
IngestConfig parse_ingest_config(const std::string& json_text);

struct IngestResult {
  BinaryDataset data;
  Index rows_read = 0;
  Index rows_dropped_missing = 0;
};

/// Read an RFC-4180-style CSV (header required) and apply the cut rules.
/// Rows with a missing value in any used column are dropped and counted.
/// Throws ArgumentError for unparseable cells, config columns absent from
/// the CSV, or zero remaining rows.
IngestResult ingest(std::istream& csv, const IngestConfig& config);
IngestResult ingest_file(const std::string& csv_path, const IngestConfig& config);

/// Canonical 0/1 CSV (attributes then response); ingesting it back with a
/// passthrough config reproduces the dataset exactly.
void write_canonical_csv(std::ostream& out, const BinaryDataset& data,
                         const std::string& response_name = "y");
IngestConfig make_passthrough_config(const BinaryDataset& data,
                                     const std::string& response_name = "y");

std::string model_to_json(const PatternModel& model, const std::vector<std::string>& var_names);
PatternModel model_from_json(const std::string& json_text, std::vector<std::string>* var_names);

std::string report_to_json(const LpsReport& report);

/// Fits saved by the `fit` subcommand and reread by `tune`.
std::string path_to_json(const std::vector<ModelFit>& path);
std::vector<ModelFit> path_from_json(const std::string& json_text);

}  // namespace lps

#endif  // LPS_IO_HPP
