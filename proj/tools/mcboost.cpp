// mcboost: train, predict, evaluate and benchmark multi-class boosting models.
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcboost/benchmark.hpp"
#include "mcboost/column_generation.hpp"
#include "mcboost/data_io.hpp"
#include "mcboost/error.hpp"

namespace fs = std::filesystem;
using namespace mcboost;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataFlags {
  std::string path;
  std::string format = "csv";
  std::string label_col;
  bool header = false;

  void add_to(CLI::App& cmd, const char* data_help = "input data file") {
    cmd.add_option("--data", path, data_help)->required();
    cmd.add_option("--format", format, "csv or libsvm")->check(CLI::IsMember({"csv", "libsvm"}));
    cmd.add_option("--label-col", label_col, "csv label column: header name or 0-based index (default: last)");
    cmd.add_flag("--header", header, "csv file has a header row");
  }

  CsvOptions csv() const { return {header, label_col}; }
};

LabeledData load_labeled(const DataFlags& flags, const LabelMap* fixed = nullptr,
                         std::size_t num_features = 0) {
  if (flags.format == "libsvm") return load_libsvm(flags.path, fixed, num_features);
  auto data = load_csv(flags.path, flags.csv(), fixed);
  if (num_features != 0 && data.data.num_features() != num_features) {
    throw DataError(flags.path + ": has " + std::to_string(data.data.num_features()) +
                    " features, expected " + std::to_string(num_features));
  }
  return data;
}

RawTable load_raw(const DataFlags& flags, std::size_t num_features) {
  RawTable table = flags.format == "libsvm" ? load_libsvm_table(flags.path, num_features)
                                            : load_csv_table(flags.path, flags.csv());
  if (table.num_features != num_features) {
    throw DataError(flags.path + ": has " + std::to_string(table.num_features) +
                    " features, model expects " + std::to_string(num_features));
  }
  return table;
}

// Writes through a temporary file so readers never see a partial file.
template <typename Writer>
void write_atomically(const fs::path& path, Writer&& write) {
  fs::path tmp = path;
  tmp += ".tmp";
  write(tmp);
  fs::rename(tmp, path);
}

std::string token_for(const LoadedModel& model, ClassId c) {
  return model.labels ? model.labels->token(c) : std::to_string(c);
}

struct TrainFlags {
  DataFlags data;
  std::string algorithm = "cw";
  double C = 1e4;
  double epsilon = 0.1;
  int tau_max = 2;
  int iterations = 500;
  double cg_tol = 1e-5;
  std::uint64_t seed = 0;
  bool no_timings = false;
  CLI::Option* C_opt = nullptr;
  CLI::Option* tau_opt = nullptr;

  void add_solver_options(CLI::App& cmd) {
    C_opt = cmd.add_option("--C", C, "regularization strength");
    cmd.add_option("--epsilon", epsilon, "KKT violation tolerance");
    tau_opt = cmd.add_option("--tau-max", tau_max, "maximum working-set iterations per solve");
    cmd.add_option("--iterations", iterations, "maximum column-generation iterations");
    cmd.add_option("--cg-tol", cg_tol, "relative objective change that stops training");
    cmd.add_option("--seed", seed, "random seed");
    cmd.add_flag("--no-timings", no_timings, "write null timing fields so traces are reproducible");
  }

  TrainConfig config(Algorithm algo) const {
    TrainConfig cfg;
    cfg.algorithm = algo;
    cfg.C = C;
    cfg.epsilon = epsilon;
    cfg.tau_max = tau_max;
    cfg.max_cg_iterations = iterations;
    cfg.cg_rel_tolerance = cg_tol;
    cfg.rng_seed = seed;
    if (algo == Algorithm::class_wise_stagewise) {
      if (tau_opt->count() > 0 && tau_max != 1) throw UsageError("cw-stagewise requires --tau-max 1");
      if (C_opt->count() > 0 && C != kStagewiseC) throw UsageError("cw-stagewise runs at C = 1e8; drop --C");
      cfg.tau_max = 1;
      cfg.C = kStagewiseC;
    }
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

Algorithm parse_algorithm_flag(const std::string& name) {
  const auto algo = parse_algorithm(name);
  if (!algo) throw UsageError("unknown algorithm '" + name + "' (expected cw, shared or cw-stagewise)");
  return *algo;
}

int cmd_train(const TrainFlags& flags, const std::string& test_path, const std::string& model_out,
              const std::string& trace_out) {
  const TrainConfig cfg = flags.config(parse_algorithm_flag(flags.algorithm));
  const auto train_data = load_labeled(flags.data);
  std::optional<LabeledData> test_data;
  if (!test_path.empty()) {
    DataFlags test_flags = flags.data;
    test_flags.path = test_path;
    test_data = load_labeled(test_flags, &train_data.labels, train_data.data.num_features());
  }

  TrainOptions options;
  if (test_data) options.test_set = &test_data->data;
  const auto result = train(train_data.data, cfg, options);

  if (!model_out.empty()) {
    write_atomically(model_out, [&](const fs::path& p) { save_model(p, result.model, &train_data.labels); });
  }
  if (!trace_out.empty()) {
    write_atomically(trace_out, [&](const fs::path& p) { write_trace(p, result.trace, !flags.no_timings); });
  }

  const auto& last = result.trace.records.back();
  std::cout << "iterations: " << last.iter << " ("
            << (result.stop == StopReason::converged ? "objective converged" : "iteration limit") << ")\n";
  std::cout << "objective: " << last.objective << '\n';
  std::cout << "train_error: " << last.train_error << '\n';
  if (last.test_error) std::cout << "test_error: " << *last.test_error << '\n';
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const DataFlags& data, const std::string& out_path) {
  const auto model = load_model(model_path);
  const auto table = load_raw(data, model.model.num_features());
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw DataError(out_path + ": cannot open file for writing");
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  const std::size_t d = table.num_features;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const std::span<const double> row(table.features.data() + r * d, d);
    out << token_for(model, predict(model.model, row)) << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const DataFlags& data) {
  const auto model = load_model(model_path);
  auto table = load_raw(data, model.model.num_features());
  LabelMap labels;
  if (model.labels) {
    labels = *model.labels;
  } else {
    std::vector<std::string> tokens;
    for (ClassId c = 0; c < model.model.num_classes(); ++c) tokens.push_back(std::to_string(c));
    labels = LabelMap::from_tokens(tokens);
  }
  const auto labeled = label_table(std::move(table), &labels, data.path);
  if (labeled.data.num_classes() != model.model.num_classes()) {
    throw DataError("model and data disagree on the number of classes");
  }
  const std::size_t m = labeled.data.num_examples();
  const double err = error_rate(model.model, labeled.data);
  std::cout << "examples: " << m << '\n';
  std::cout << "error: " << err << '\n';
  return kExitOk;
}

std::string format_C(double C) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", C);
  return buf;
}

int cmd_benchmark(const TrainFlags& flags, double test_fraction, const std::vector<std::string>& algorithms,
                  const std::vector<double>& C_values, int repeats, const std::string& out_dir) {
  if (repeats < 1) throw UsageError("--repeats must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("--test-fraction must lie in (0, 1)");
  BenchmarkConfig bench;
  bench.test_fraction = test_fraction;
  bench.repeats = repeats;
  bench.seed = flags.seed;
  bench.algorithms.clear();
  for (const auto& name : algorithms) {
    const Algorithm algo = parse_algorithm_flag(name);
    if (algo == Algorithm::class_wise_stagewise && flags.tau_opt->count() > 0 && flags.tau_max != 1) {
      throw UsageError("cw-stagewise requires --tau-max 1");
    }
    bench.algorithms.push_back(algo);
  }
  if (!C_values.empty()) bench.C_values = C_values;
  for (double C : bench.C_values) {
    if (!(C > 0.0)) throw UsageError("--C values must be positive");
  }
  bench.base = flags.config(Algorithm::class_wise);

  const auto data = load_labeled(flags.data);
  const auto result = run_benchmark(data.data, bench);

  const fs::path dir(out_dir);
  fs::create_directories(dir / "traces");
  for (const auto& cell : result.cells) {
    const std::string name = std::string(to_string(cell.algorithm)) + "_C" + format_C(cell.C) + "_r" +
                             std::to_string(cell.repeat) + ".ndjson";
    write_atomically(dir / "traces" / name,
                     [&](const fs::path& p) { write_trace(p, cell.trace, !flags.no_timings); });
  }
  write_atomically(dir / "summary.csv", [&](const fs::path& p) { write_summary_csv(p, result.summary); });
  write_atomically(dir / "curves.csv", [&](const fs::path& p) { write_curves_csv(p, result.curves); });

  std::printf("%-14s %10s %8s %18s %10s %10s %10s\n", "algorithm", "C", "repeats", "test_error",
              "total_s", "solver_s", "stumps");
  for (const auto& row : result.summary) {
    std::printf("%-14s %10s %8d %9.4f +- %6.4f %10.3f %10.3f %10.1f\n",
                std::string(to_string(row.algorithm)).c_str(), format_C(row.C).c_str(), row.repeats,
                row.test_error_mean, row.test_error_std, row.total_s_mean, row.solver_s_mean,
                row.stumps_total_mean);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-class boosting with class-wise weak learners and coordinate descent"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  std::string test_path, model_out, trace_out;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_flags.data.add_to(*train_cmd, "training data file");
  train_cmd->add_option("--algorithm", train_flags.algorithm, "cw, shared or cw-stagewise");
  train_flags.add_solver_options(*train_cmd);
  train_cmd->add_option("--test", test_path, "optional test data file (same format)");
  train_cmd->add_option("--model-out", model_out, "where to write the model JSON");
  train_cmd->add_option("--trace-out", trace_out, "where to write the per-iteration NDJSON trace");

  std::string predict_model, predict_out;
  DataFlags predict_data;
  auto* predict_cmd = app.add_subcommand("predict", "predict labels for a data file");
  predict_cmd->add_option("--model", predict_model, "model JSON")->required();
  predict_data.add_to(*predict_cmd);
  predict_cmd->add_option("--out", predict_out, "output file, one label per row (default: stdout)");

  std::string eval_model;
  DataFlags eval_data;
  auto* eval_cmd = app.add_subcommand("evaluate", "report the error rate of a model on labeled data");
  eval_cmd->add_option("--model", eval_model, "model JSON")->required();
  eval_data.add_to(*eval_cmd);

  TrainFlags bench_flags;
  double test_fraction = 0.25;
  std::vector<std::string> bench_algorithms{"cw", "shared", "cw-stagewise"};
  std::vector<double> bench_C;
  int repeats = 5;
  std::string out_dir;
  auto* bench_cmd = app.add_subcommand("benchmark", "compare algorithms over repeated random splits");
  bench_flags.data.add_to(*bench_cmd);
  bench_cmd->add_option("--test-fraction", test_fraction, "held-out fraction per split");
  bench_cmd->add_option("--algorithms", bench_algorithms, "comma-separated list")->delimiter(',');
  bench_cmd->add_option("--repeats", repeats, "number of random splits");
  bench_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  bench_flags.add_solver_options(*bench_cmd);
  bench_cmd->remove_option(bench_flags.C_opt);
  bench_flags.C_opt = bench_cmd->add_option("--C", bench_C, "regularization strength(s), comma-separated")
                          ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_flags, test_path, model_out, trace_out);
    if (*predict_cmd) return cmd_predict(predict_model, predict_data, predict_out);
    if (*eval_cmd) return cmd_evaluate(eval_model, eval_data);
    if (*bench_cmd) return cmd_benchmark(bench_flags, test_fraction, bench_algorithms, bench_C, repeats, out_dir);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
