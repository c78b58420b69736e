#include "mcboost/benchmark.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "mcboost/data_io.hpp"
#include "mcboost/error.hpp"

namespace mcboost {

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double solver_seconds(const TrainTrace& trace) {
  double ms = 0.0;
  for (const auto& r : trace.records) ms += r.solver_ms;
  return ms / 1000.0;
}

// Cells grouped by (algorithm, C) in first-appearance order.
std::vector<std::vector<const BenchmarkCell*>> group_cells(const std::vector<BenchmarkCell>& cells) {
  std::vector<std::pair<Algorithm, double>> keys;
  std::vector<std::vector<const BenchmarkCell*>> groups;
  for (const auto& cell : cells) {
    std::size_t g = 0;
    while (g < keys.size() && !(keys[g].first == cell.algorithm && keys[g].second == cell.C)) ++g;
    if (g == keys.size()) {
      keys.emplace_back(cell.algorithm, cell.C);
      groups.emplace_back();
    }
    groups[g].push_back(&cell);
  }
  return groups;
}

}  // namespace

TrainConfig cell_config(const TrainConfig& base, Algorithm algorithm, double C, std::uint64_t seed) {
  TrainConfig cfg = base;
  cfg.algorithm = algorithm;
  cfg.C = algorithm == Algorithm::class_wise_stagewise ? kStagewiseC : C;
  if (algorithm == Algorithm::class_wise_stagewise) cfg.tau_max = 1;
  cfg.rng_seed = seed;
  return cfg;
}

std::vector<SummaryRow> summarize(const std::vector<BenchmarkCell>& cells) {
  std::vector<SummaryRow> rows;
  for (const auto& group : group_cells(cells)) {
    std::vector<double> test_err, total_s, solver_s, stumps;
    for (const auto* cell : group) {
      if (cell->trace.records.empty()) continue;
      const auto& last = cell->trace.records.back();
      test_err.push_back(last.test_error.value_or(std::nan("")));
      total_s.push_back(last.total_ms / 1000.0);
      solver_s.push_back(solver_seconds(cell->trace));
      stumps.push_back(static_cast<double>(last.stumps_total));
    }
    SummaryRow row;
    row.algorithm = group.front()->algorithm;
    row.C = group.front()->C;
    row.repeats = static_cast<int>(group.size());
    row.test_error_mean = mean(test_err);
    row.test_error_std = stddev(test_err);
    row.total_s_mean = mean(total_s);
    row.solver_s_mean = mean(solver_s);
    row.stumps_total_mean = mean(stumps);
    rows.push_back(row);
  }
  return rows;
}

std::vector<CurvePoint> aggregate_curves(const std::vector<BenchmarkCell>& cells) {
  std::vector<CurvePoint> points;
  for (const auto& group : group_cells(cells)) {
    std::size_t longest = 0;
    for (const auto* cell : group) longest = std::max(longest, cell->trace.records.size());
    for (std::size_t t = 0; t < longest; ++t) {
      std::vector<double> test_err, train_err, objective, total_s, solver_s;
      for (const auto* cell : group) {
        const auto& recs = cell->trace.records;
        if (t >= recs.size()) continue;
        if (recs[t].test_error) test_err.push_back(*recs[t].test_error);
        train_err.push_back(recs[t].train_error);
        objective.push_back(recs[t].objective);
        total_s.push_back(recs[t].total_ms / 1000.0);
        double ms = 0.0;
        for (std::size_t k = 0; k <= t; ++k) ms += recs[k].solver_ms;
        solver_s.push_back(ms / 1000.0);
      }
      CurvePoint pt;
      pt.algorithm = group.front()->algorithm;
      pt.C = group.front()->C;
      pt.iter = static_cast<int>(t + 1);
      pt.runs = static_cast<int>(train_err.size());
      pt.test_error_mean = mean(test_err);
      pt.test_error_std = stddev(test_err);
      pt.train_error_mean = mean(train_err);
      pt.objective_mean = mean(objective);
      pt.total_s_mean = mean(total_s);
      pt.solver_s_mean = mean(solver_s);
      points.push_back(pt);
    }
  }
  return points;
}

BenchmarkResult run_benchmark(const Dataset& data, const BenchmarkConfig& config) {
  if (config.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  BenchmarkResult result;
  for (Algorithm algorithm : config.algorithms) {
    const std::vector<double> Cs = algorithm == Algorithm::class_wise_stagewise
                                       ? std::vector<double>{kStagewiseC}
                                       : config.C_values;
    for (double C : Cs) {
      for (int r = 0; r < config.repeats; ++r) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
        const auto [train_set, test_set] = split(data, 1.0 - config.test_fraction, seed);
        const TrainConfig cfg = cell_config(config.base, algorithm, C, seed);
        TrainOptions options;
        options.test_set = &test_set;
        auto trained = train(train_set, cfg, options);
        result.cells.push_back({algorithm, cfg.C, r, std::move(trained.trace)});
      }
    }
  }
  result.summary = summarize(result.cells);
  result.curves = aggregate_curves(result.cells);
  return result;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open file for writing");
  out.precision(17);
  return out;
}

}  // namespace

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  auto out = open_csv(path);
  out << "algorithm,repeats,test_error_mean,test_error_std,total_s_mean,solver_s_mean,stumps_total_mean,C\n";
  for (const auto& r : rows) {
    out << to_string(r.algorithm) << ',' << r.repeats << ',' << r.test_error_mean << ','
        << r.test_error_std << ',' << r.total_s_mean << ',' << r.solver_s_mean << ','
        << r.stumps_total_mean << ',' << r.C << '\n';
  }
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points) {
  auto out = open_csv(path);
  out << "algorithm,C,iter,runs,test_error_mean,test_error_std,train_error_mean,objective_mean,"
         "total_s_mean,solver_s_mean\n";
  for (const auto& p : points) {
    out << to_string(p.algorithm) << ',' << p.C << ',' << p.iter << ',' << p.runs << ','
        << p.test_error_mean << ',' << p.test_error_std << ',' << p.train_error_mean << ','
        << p.objective_mean << ',' << p.total_s_mean << ',' << p.solver_s_mean << '\n';
  }
}

}  // namespace mcboost
