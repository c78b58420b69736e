#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "mcboost/config.hpp"
#include "mcboost/dataset.hpp"
#include "mcboost/fcd_solver.hpp"
#include "mcboost/model.hpp"

namespace mcboost {

// lambda(i, y) = 1 for y != y_i, 0 on the unused (i, y_i) entries.
ConstraintMatrix init_duals(const Dataset& data);

// lambda(i, y) = (C/p) mu(i, y) for y != y_i.
void update_duals(ConstraintMatrix& lambda, const MuCache& mu, std::span<const ClassId> labels,
                  double C, double p);

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double train_error = 0.0;
  std::optional<double> test_error;
  std::size_t stumps_per_class = 0;
  // Distinct learners generated so far: K per iteration for the class-wise
  // variants, one per iteration for shared.
  std::size_t stumps_total = 0;
  double solver_ms = 0.0;
  double total_ms = 0.0;
  SolverExit exit_reason = SolverExit::converged;
};

struct TrainTrace {
  double initial_objective = 0.0;  // objective of the empty model, C
  std::vector<IterationRecord> records;
};

// True once the relative objective change drops below cg_rel_tolerance or
// the iteration budget is spent. The first iteration is compared against
// the empty-model objective.
bool stopping_check(const TrainTrace& trace, const TrainConfig& config);

enum class StopReason { converged, max_iterations };

// State visible after each column-generation iteration.
struct IterationView {
  const Model& model;
  const ConstraintMatrix& lambda_before;  // duals used to generate learners
  const ConstraintMatrix& lambda_after;
  const FcdSolver& solver;
  const IterationRecord& record;
};

struct TrainOptions {
  const Dataset* test_set = nullptr;
  std::function<void(const IterationView&)> on_iteration;
  UpdateObserver on_update;
};

struct TrainResult {
  Model model;
  TrainTrace trace;
  StopReason stop = StopReason::max_iterations;
};

TrainResult train(const Dataset& data, const TrainConfig& config, const TrainOptions& options = {});

}  // namespace mcboost
