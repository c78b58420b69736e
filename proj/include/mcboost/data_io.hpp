#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcboost/column_generation.hpp"
#include "mcboost/dataset.hpp"
#include "mcboost/model.hpp"

namespace mcboost {

// Bijection between label tokens and class indices 0..K-1. Tokens are
// ordered numerically when every token is a number, lexicographically
// otherwise, so the mapping does not depend on row order.
class LabelMap {
 public:
  LabelMap() = default;
  static LabelMap from_tokens(std::vector<std::string> tokens);

  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  const std::string& token(ClassId c) const { return tokens_.at(static_cast<std::size_t>(c)); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::optional<ClassId> find(std::string_view token) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::vector<std::string> tokens_;
};

struct LabeledData {
  Dataset data;
  LabelMap labels;
};

// Feature rows plus the raw label token of each row, before any label
// mapping. Used where labels are unknown or ignored (prediction).
struct RawTable {
  std::vector<double> features;  // row-major
  std::size_t num_features = 0;
  std::vector<std::string> tokens;
  std::vector<std::size_t> lines;  // source line of each row

  std::size_t num_rows() const noexcept { return tokens.size(); }
};

struct CsvOptions {
  bool has_header = false;
  // Header name, or a 0-based column index. Empty selects the last column.
  std::string label_column;
};

RawTable load_csv_table(const std::filesystem::path& path, const CsvOptions& options);
RawTable load_libsvm_table(const std::filesystem::path& path, std::size_t num_features = 0);

// Maps the tokens of a raw table to classes. With fixed_labels, unknown
// tokens are an error; otherwise a fresh map is built.
LabeledData label_table(RawTable table, const LabelMap* fixed_labels, const std::string& where);

// With fixed_labels, tokens are mapped through it (unknown tokens are an
// error) and K is taken from it. Otherwise a fresh map is built.
LabeledData load_csv(const std::filesystem::path& path, const CsvOptions& options,
                     const LabelMap* fixed_labels = nullptr);
void write_csv(const std::filesystem::path& path, const Dataset& data, const LabelMap& labels,
               bool header = true);

// num_features = 0 infers d from the largest index in the file.
LabeledData load_libsvm(const std::filesystem::path& path, const LabelMap* fixed_labels = nullptr,
                        std::size_t num_features = 0);
void write_libsvm(const std::filesystem::path& path, const Dataset& data, const LabelMap& labels);

// Stratified split: each class contributes round(n_c * train_fraction)
// examples (halves round up) to the training side. Row order is preserved.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

nlohmann::ordered_json model_to_json(const Model& model, const LabelMap* labels = nullptr);

struct LoadedModel {
  Model model;
  std::optional<LabelMap> labels;
};

LoadedModel model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const Model& model,
                const LabelMap* labels = nullptr);
LoadedModel load_model(const std::filesystem::path& path);

// One NDJSON line per record. Without timings, solver_ms and total_ms are
// written as null so repeated runs produce identical bytes.
std::string trace_record_json(const IterationRecord& record, bool include_timings = true);
void write_trace(const std::filesystem::path& path, const TrainTrace& trace,
                 bool include_timings = true);
std::vector<IterationRecord> read_trace(const std::filesystem::path& path);

}  // namespace mcboost
