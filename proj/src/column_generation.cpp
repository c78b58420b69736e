#include "mcboost/column_generation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mcboost/error.hpp"
#include "mcboost/weak_learners.hpp"

namespace mcboost {

ConstraintMatrix init_duals(const Dataset& data) {
  ConstraintMatrix lambda(data.num_examples(), data.num_classes(), 1.0);
  for (std::size_t i = 0; i < data.num_examples(); ++i) lambda(i, data.label(i)) = 0.0;
  return lambda;
}

void update_duals(ConstraintMatrix& lambda, const MuCache& mu, std::span<const ClassId> labels,
                  double C, double p) {
  const double scale = C / p;
  for (std::size_t i = 0; i < lambda.rows(); ++i) {
    for (ClassId y = 0; y < lambda.cols(); ++y) {
      lambda(i, y) = y == labels[i] ? 0.0 : scale * mu(i, y);
    }
  }
}

namespace {

bool objective_settled(const TrainTrace& trace, const TrainConfig& config) {
  if (trace.records.empty()) return false;
  const double current = trace.records.back().objective;
  const double previous = trace.records.size() >= 2 ? trace.records[trace.records.size() - 2].objective
                                                    : trace.initial_objective;
  return std::abs(current - previous) / std::max(std::abs(previous), 1e-12) < config.cg_rel_tolerance;
}

// Class scores of a fixed dataset, with stump outputs cached per learner so
// each iteration only pays for multiply-adds.
class ScoreTable {
 public:
  explicit ScoreTable(const Dataset& data)
      : data_(data), outputs_(static_cast<std::size_t>(data.num_classes())) {}

  double error_rate(const Model& model) {
    const std::size_t m = data_.num_examples();
    const auto K = static_cast<std::size_t>(data_.num_classes());
    std::vector<double> scores(m * K, 0.0);
    for (std::size_t c = 0; c < K; ++c) {
      const auto& ens = model.ensemble(static_cast<ClassId>(c));
      auto& cached = outputs_[c];
      for (std::size_t t = cached.size(); t < ens.stumps.size(); ++t) {
        std::vector<std::int8_t> out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<std::int8_t>(ens.stumps[t](data_.row(i)));
        cached.push_back(std::move(out));
      }
      for (std::size_t t = 0; t < ens.weights.size(); ++t) {
        const double w = ens.weights[t];
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i) scores[i * K + c] += w * cached[t][i];
      }
    }
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto first = scores.begin() + static_cast<std::ptrdiff_t>(i * K);
      const auto best = std::max_element(first, first + static_cast<std::ptrdiff_t>(K)) - first;
      if (best != data_.label(i)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(m);
  }

 private:
  const Dataset& data_;
  std::vector<std::vector<std::vector<std::int8_t>>> outputs_;
};

}  // namespace

bool stopping_check(const TrainTrace& trace, const TrainConfig& config) {
  if (trace.records.empty()) return false;
  return trace.records.back().iter >= config.max_cg_iterations || objective_settled(trace, config);
}

TrainResult train(const Dataset& data, const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  data.require_all_classes();
  if (options.test_set != nullptr) {
    if (options.test_set->num_features() != data.num_features()) {
      throw DataError("test set has " + std::to_string(options.test_set->num_features()) +
                      " features, training set has " + std::to_string(data.num_features()));
    }
    if (options.test_set->num_classes() != data.num_classes()) {
      throw DataError("test set and training set disagree on the number of classes");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const int K = data.num_classes();
  const double p = static_cast<double>(data.num_constraints());

  TrainResult result;
  result.model = Model(K, data.num_features());
  Model& model = result.model;
  const StumpSearchIndex index(data);
  FcdSolver solver(data, config);
  ConstraintMatrix lambda = init_duals(data);
  ScoreTable train_scores(data);
  std::optional<ScoreTable> test_scores;
  if (options.test_set != nullptr) test_scores.emplace(*options.test_set);

  result.trace.initial_objective = config.C;
  std::vector<std::size_t> new_variables(static_cast<std::size_t>(K));

  for (int iter = 1;; ++iter) {
    const ConstraintMatrix lambda_before = lambda;
    std::size_t generated = 0;
    if (config.algorithm == Algorithm::shared) {
      const auto best = generate_shared(data, lambda, index);
      for (ClassId c = 0; c < K; ++c) model.append(c, best.stump);
      generated = 1;
    } else {
      const auto best = generate_class_wise(data, lambda, index);
      for (ClassId c = 0; c < K; ++c) model.append(c, best[static_cast<std::size_t>(c)].stump);
      generated = static_cast<std::size_t>(K);
    }
    for (ClassId c = 0; c < K; ++c) {
      const std::size_t slot = model.ensemble(c).stumps.size() - 1;
      new_variables[static_cast<std::size_t>(c)] = model.variable_index(c, slot);
    }

    const SolveStats stats = solver.solve(model, new_variables, options.on_update);
    solver.refresh_mu();
    update_duals(lambda, solver.mu(), data.labels(), config.C, p);

    IterationRecord record;
    record.iter = iter;
    record.objective = objective_from_mu(solver.mu(), solver.weights(), data.labels(), config.C);
    record.train_error = train_scores.error_rate(model);
    if (test_scores) record.test_error = test_scores->error_rate(model);
    record.stumps_per_class = model.ensemble(0).stumps.size();
    record.stumps_total =
        (result.trace.records.empty() ? 0 : result.trace.records.back().stumps_total) + generated;
    record.solver_ms = stats.wall_ms;
    record.total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    record.exit_reason = stats.exit;
    result.trace.records.push_back(record);

    if (options.on_iteration) {
      options.on_iteration({model, lambda_before, lambda, solver, result.trace.records.back()});
    }
    if (objective_settled(result.trace, config)) {
      result.stop = StopReason::converged;
      break;
    }
    if (iter >= config.max_cg_iterations) {
      result.stop = StopReason::max_iterations;
      break;
    }
  }
  return result;
}

}  // namespace mcboost
