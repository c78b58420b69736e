#include "mcboost/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mcboost/error.hpp"

namespace mcboost {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open file for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string format_real(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180: comma separated, optional double quotes, "" escapes a quote,
// quoted fields may span lines. Blank lines are skipped.
std::vector<CsvRecord> parse_csv(const std::string& text, const std::string& where) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(field);
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && trim(current.fields[0]).empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (in_quotes) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!trim(field).empty() || field_quoted) {
          throw DataError(where + ":" + std::to_string(line) + ": unexpected quote inside field");
        }
        field.clear();
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(ch);
    }
  }
  if (in_quotes) throw DataError(where + ": unterminated quoted field");
  if (!field.empty() || !current.fields.empty()) end_record();
  return records;
}

std::size_t resolve_label_column(const CsvOptions& options, const std::vector<std::string>* header,
                                 std::size_t num_columns, const std::string& where) {
  if (options.label_column.empty()) return num_columns - 1;
  if (header != nullptr) {
    const auto it = std::find_if(header->begin(), header->end(), [&](const std::string& h) {
      return trim(h) == trim(options.label_column);
    });
    if (it != header->end()) return static_cast<std::size_t>(it - header->begin());
  }
  std::size_t index = 0;
  const std::string_view s = trim(options.label_column);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), index);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw DataError(where + ": label column '" + options.label_column + "' not found");
  }
  if (index >= num_columns) {
    throw DataError(where + ": label column index " + std::to_string(index) + " out of range");
  }
  return index;
}

LabelMap resolve_labels(const std::vector<std::string>& tokens, const LabelMap* fixed,
                        const std::string& where) {
  if (fixed != nullptr) return *fixed;
  LabelMap map = LabelMap::from_tokens(tokens);
  if (map.size() < 2) throw DataError(where + ": need at least 2 distinct labels, found " +
                                      std::to_string(map.size()));
  return map;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

LabelMap LabelMap::from_tokens(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  const bool numeric = std::all_of(tokens.begin(), tokens.end(),
                                   [](const std::string& t) { return parse_real(t).has_value(); });
  if (numeric) {
    std::stable_sort(tokens.begin(), tokens.end(), [](const std::string& a, const std::string& b) {
      return *parse_real(a) < *parse_real(b);
    });
  }
  LabelMap map;
  map.tokens_ = std::move(tokens);
  return map;
}

std::optional<ClassId> LabelMap::find(std::string_view token) const {
  const auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) return std::nullopt;
  return static_cast<ClassId>(it - tokens_.begin());
}

RawTable load_csv_table(const std::filesystem::path& path, const CsvOptions& options) {
  const std::string where = path.string();
  auto records = parse_csv(read_file(path), where);
  std::optional<std::vector<std::string>> header;
  if (options.has_header) {
    if (records.empty()) throw DataError(where + ": missing header row");
    header = std::move(records.front().fields);
    records.erase(records.begin());
  }
  if (records.empty()) throw DataError(where + ": no data rows");

  const std::size_t num_columns = header ? header->size() : records.front().fields.size();
  if (num_columns < 2) throw DataError(where + ": need a label column and at least one feature");
  const std::size_t label_col = resolve_label_column(options, header ? &*header : nullptr, num_columns, where);

  RawTable table;
  table.num_features = num_columns - 1;
  table.features.reserve(records.size() * table.num_features);
  table.tokens.reserve(records.size());
  for (const auto& rec : records) {
    const std::string loc = where + ":" + std::to_string(rec.line);
    if (rec.fields.size() != num_columns) {
      throw DataError(loc + ": expected " + std::to_string(num_columns) + " columns, found " +
                      std::to_string(rec.fields.size()));
    }
    for (std::size_t col = 0; col < num_columns; ++col) {
      if (col == label_col) {
        table.tokens.emplace_back(trim(rec.fields[col]));
        continue;
      }
      const auto v = parse_real(rec.fields[col]);
      if (!v) {
        throw DataError(loc + ": column " + std::to_string(col) + ": not a finite number: '" +
                        rec.fields[col] + "'");
      }
      table.features.push_back(*v);
    }
    table.lines.push_back(rec.line);
  }
  return table;
}

LabeledData label_table(RawTable table, const LabelMap* fixed_labels, const std::string& where) {
  LabelMap map = resolve_labels(table.tokens, fixed_labels, where);
  std::vector<ClassId> labels;
  labels.reserve(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const auto c = map.find(table.tokens[r]);
    if (!c) {
      throw DataError(where + ":" + std::to_string(table.lines[r]) + ": unknown label '" +
                      table.tokens[r] + "'");
    }
    labels.push_back(*c);
  }
  return {Dataset(std::move(table.features), table.num_features, std::move(labels), map.size()),
          std::move(map)};
}

LabeledData load_csv(const std::filesystem::path& path, const CsvOptions& options,
                     const LabelMap* fixed_labels) {
  return label_table(load_csv_table(path, options), fixed_labels, path.string());
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const LabelMap& labels,
               bool header) {
  auto out = open_for_write(path);
  if (header) {
    for (std::size_t f = 0; f < data.num_features(); ++f) out << 'f' << f << ',';
    out << "label\n";
  }
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    for (double v : data.row(i)) out << format_real(v) << ',';
    out << csv_quote(labels.token(data.label(i))) << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

RawTable load_libsvm_table(const std::filesystem::path& path, std::size_t num_features) {
  const std::string where = path.string();
  const std::string text = read_file(path);

  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  RawTable table;
  std::size_t max_index = 0;

  std::istringstream in(text);
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    std::string_view content = raw;
    if (const auto hash = content.find('#'); hash != std::string_view::npos) content = content.substr(0, hash);
    std::istringstream fields{std::string(trim(content))};
    std::string token;
    if (!(fields >> token)) continue;
    const std::string loc = where + ":" + std::to_string(line);
    std::vector<std::pair<std::size_t, double>> entries;
    std::size_t last = 0;
    std::string pair;
    while (fields >> pair) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) throw DataError(loc + ": malformed feature '" + pair + "'");
      std::size_t idx = 0;
      const auto [end, ec] = std::from_chars(pair.data(), pair.data() + colon, idx);
      if (ec != std::errc() || end != pair.data() + colon) {
        throw DataError(loc + ": malformed feature index in '" + pair + "'");
      }
      if (idx < 1) throw DataError(loc + ": feature index must be >= 1");
      if (idx <= last) throw DataError(loc + ": feature indices must be strictly increasing");
      const auto v = parse_real(std::string_view(pair).substr(colon + 1));
      if (!v) throw DataError(loc + ": malformed feature value in '" + pair + "'");
      entries.emplace_back(idx, *v);
      last = idx;
    }
    max_index = std::max(max_index, last);
    table.tokens.push_back(token);
    table.lines.push_back(line);
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw DataError(where + ": no data rows");

  std::size_t d = max_index;
  if (num_features != 0) {
    if (max_index > num_features) {
      throw DataError(where + ": feature index " + std::to_string(max_index) + " exceeds " +
                      std::to_string(num_features) + " features");
    }
    d = num_features;
  }
  if (d == 0) throw DataError(where + ": no features");

  table.num_features = d;
  table.features.assign(rows.size() * d, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [idx, v] : rows[r]) table.features[r * d + idx - 1] = v;
  }
  return table;
}

LabeledData load_libsvm(const std::filesystem::path& path, const LabelMap* fixed_labels,
                        std::size_t num_features) {
  return label_table(load_libsvm_table(path, num_features), fixed_labels, path.string());
}

void write_libsvm(const std::filesystem::path& path, const Dataset& data, const LabelMap& labels) {
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    out << labels.token(data.label(i));
    const auto row = data.row(i);
    for (std::size_t f = 0; f < row.size(); ++f) {
      if (row[f] != 0.0) out << ' ' << f + 1 << ':' << format_real(row[f]);
    }
    out << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.num_classes()));
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    by_class[static_cast<std::size_t>(data.label(i))].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(rows.size()) * train_fraction + 0.5));
    if (n_train == 0) {
      throw DataError("split: class " + std::to_string(c) + " with " + std::to_string(rows.size()) +
                      " example(s) would have no training examples");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  if (test_rows.empty()) throw DataError("split: test side would be empty");
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.subset(train_rows), data.subset(test_rows)};
}

nlohmann::ordered_json model_to_json(const Model& model, const LabelMap* labels) {
  nlohmann::ordered_json doc;
  doc["num_classes"] = model.num_classes();
  doc["num_features"] = model.num_features();
  auto classes = nlohmann::ordered_json::array();
  for (const auto& ens : model.ensembles()) {
    auto stumps = nlohmann::ordered_json::array();
    for (const auto& s : ens.stumps) {
      nlohmann::ordered_json js;
      js["feature"] = s.feature;
      js["threshold"] = s.threshold;
      js["polarity"] = s.polarity;
      stumps.push_back(std::move(js));
    }
    nlohmann::ordered_json jc;
    jc["stumps"] = std::move(stumps);
    jc["weights"] = ens.weights;
    classes.push_back(std::move(jc));
  }
  doc["classes"] = std::move(classes);
  if (labels != nullptr) doc["labels"] = labels->tokens();
  return doc;
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw DataError("model: missing field " + path + key);
  return obj.at(key);
}

}  // namespace

LoadedModel model_from_json(const nlohmann::json& doc) {
  const auto& k = require(doc, "num_classes", "");
  const auto& d = require(doc, "num_features", "");
  if (!k.is_number_integer() || k.get<long long>() < 2) throw DataError("model: num_classes must be an integer >= 2");
  if (!d.is_number_unsigned() || d.get<long long>() < 1) throw DataError("model: num_features must be an integer >= 1");
  const int K = k.get<int>();
  LoadedModel out{Model(K, d.get<std::size_t>()), std::nullopt};

  const auto& classes = require(doc, "classes", "");
  if (!classes.is_array() || classes.size() != static_cast<std::size_t>(K)) {
    throw DataError("model: classes must be an array of num_classes entries");
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const std::string at = "classes[" + std::to_string(c) + "].";
    const auto& stumps = require(classes[c], "stumps", at);
    const auto& weights = require(classes[c], "weights", at);
    if (!stumps.is_array()) throw DataError("model: " + at + "stumps must be an array");
    if (!weights.is_array()) throw DataError("model: " + at + "weights must be an array");
    if (stumps.size() != weights.size()) throw DataError("model: " + at + "weights size differs from stumps");
    for (std::size_t t = 0; t < stumps.size(); ++t) {
      const std::string st = at + "stumps[" + std::to_string(t) + "].";
      const auto& f = require(stumps[t], "feature", st);
      const auto& th = require(stumps[t], "threshold", st);
      const auto& pol = require(stumps[t], "polarity", st);
      if (!f.is_number_unsigned() || f.get<std::size_t>() >= out.model.num_features()) {
        throw DataError("model: " + st + "feature must be an integer in [0, num_features)");
      }
      if (!th.is_number() || !std::isfinite(th.get<double>())) throw DataError("model: " + st + "threshold must be a finite number");
      if (!pol.is_number_integer() || (pol.get<int>() != 1 && pol.get<int>() != -1)) {
        throw DataError("model: " + st + "polarity must be +1 or -1");
      }
      const auto& w = weights[t];
      const std::string wt = at + "weights[" + std::to_string(t) + "]";
      if (!w.is_number() || !(w.get<double>() >= 0.0) || !std::isfinite(w.get<double>())) {
        throw DataError("model: " + wt + " must be a finite non-negative number");
      }
      out.model.append(static_cast<ClassId>(c), Stump{f.get<std::size_t>(), th.get<double>(), pol.get<int>()},
                       w.get<double>());
    }
  }
  if (doc.contains("labels")) {
    const auto& labels = doc.at("labels");
    if (!labels.is_array() || labels.size() != static_cast<std::size_t>(K)) {
      throw DataError("model: labels must be an array of num_classes strings");
    }
    std::vector<std::string> tokens;
    for (const auto& t : labels) {
      if (!t.is_string()) throw DataError("model: labels must contain strings");
      tokens.push_back(t.get<std::string>());
    }
    auto map = LabelMap::from_tokens(tokens);
    if (map.tokens() != tokens) throw DataError("model: labels are not in canonical order or contain duplicates");
    out.labels = std::move(map);
  }
  return out;
}

void save_model(const std::filesystem::path& path, const Model& model, const LabelMap* labels) {
  model.validate();
  auto out = open_for_write(path);
  out << model_to_json(model, labels).dump() << '\n';
  if (!out) throw DataError(path.string() + ": write failed");
}

LoadedModel load_model(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  return model_from_json(doc);
}

std::string trace_record_json(const IterationRecord& record, bool include_timings) {
  nlohmann::ordered_json js;
  js["iter"] = record.iter;
  js["objective"] = record.objective;
  js["train_error"] = record.train_error;
  js["test_error"] = record.test_error ? nlohmann::ordered_json(*record.test_error) : nlohmann::ordered_json(nullptr);
  js["stumps_per_class"] = record.stumps_per_class;
  js["stumps_total"] = record.stumps_total;
  js["solver_ms"] = include_timings ? nlohmann::ordered_json(record.solver_ms) : nlohmann::ordered_json(nullptr);
  js["total_ms"] = include_timings ? nlohmann::ordered_json(record.total_ms) : nlohmann::ordered_json(nullptr);
  js["exit_reason"] = to_string(record.exit_reason);
  return js.dump();
}

void write_trace(const std::filesystem::path& path, const TrainTrace& trace, bool include_timings) {
  auto out = open_for_write(path);
  for (const auto& record : trace.records) out << trace_record_json(record, include_timings) << '\n';
  if (!out) throw DataError(path.string() + ": write failed");
}

std::vector<IterationRecord> read_trace(const std::filesystem::path& path) {
  std::vector<IterationRecord> records;
  std::istringstream in(read_file(path));
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      const auto js = nlohmann::json::parse(line);
      IterationRecord r;
      r.iter = js.at("iter").get<int>();
      r.objective = js.at("objective").get<double>();
      r.train_error = js.at("train_error").get<double>();
      if (!js.at("test_error").is_null()) r.test_error = js.at("test_error").get<double>();
      r.stumps_per_class = js.at("stumps_per_class").get<std::size_t>();
      r.stumps_total = js.value("stumps_total", std::size_t{0});
      if (!js.at("solver_ms").is_null()) r.solver_ms = js.at("solver_ms").get<double>();
      if (!js.at("total_ms").is_null()) r.total_ms = js.at("total_ms").get<double>();
      const auto reason = js.at("exit_reason").get<std::string>();
      r.exit_reason = reason == "converged" ? SolverExit::converged : SolverExit::max_iterations;
      records.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace mcboost
