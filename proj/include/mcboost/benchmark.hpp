#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mcboost/column_generation.hpp"
#include "mcboost/config.hpp"
#include "mcboost/dataset.hpp"

namespace mcboost {

struct BenchmarkConfig {
  double test_fraction = 0.25;
  std::vector<Algorithm> algorithms{Algorithm::class_wise, Algorithm::shared,
                                    Algorithm::class_wise_stagewise};
  // Swept for class_wise and shared; the stage-wise variant always runs
  // at kStagewiseC.
  std::vector<double> C_values{1e4};
  int repeats = 5;
  std::uint64_t seed = 0;
  // C, algorithm and rng_seed are overridden per cell.
  TrainConfig base;
};

// One (algorithm, C, repeat) training run. Repeat r uses seed + r for both
// the split and the solver.
struct BenchmarkCell {
  Algorithm algorithm = Algorithm::class_wise;
  double C = 0.0;
  int repeat = 0;
  TrainTrace trace;
};

struct SummaryRow {
  Algorithm algorithm = Algorithm::class_wise;
  double C = 0.0;
  int repeats = 0;
  double test_error_mean = 0.0;
  double test_error_std = 0.0;
  double total_s_mean = 0.0;
  double solver_s_mean = 0.0;
  double stumps_total_mean = 0.0;
};

struct CurvePoint {
  Algorithm algorithm = Algorithm::class_wise;
  double C = 0.0;
  int iter = 0;
  int runs = 0;  // repeats that reached this iteration
  double test_error_mean = 0.0;
  double test_error_std = 0.0;
  double train_error_mean = 0.0;
  double objective_mean = 0.0;
  double total_s_mean = 0.0;
  double solver_s_mean = 0.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkCell> cells;
  std::vector<SummaryRow> summary;
  std::vector<CurvePoint> curves;
};

// Effective training configuration for a cell.
TrainConfig cell_config(const TrainConfig& base, Algorithm algorithm, double C,
                        std::uint64_t seed);

std::vector<SummaryRow> summarize(const std::vector<BenchmarkCell>& cells);
std::vector<CurvePoint> aggregate_curves(const std::vector<BenchmarkCell>& cells);

BenchmarkResult run_benchmark(const Dataset& data, const BenchmarkConfig& config);

// summary.csv columns: algorithm, repeats, test_error_mean, test_error_std,
// total_s_mean, solver_s_mean, stumps_total_mean, C.
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
void write_curves_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points);

}  // namespace mcboost
