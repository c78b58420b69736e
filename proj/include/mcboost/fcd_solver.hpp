#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mcboost/config.hpp"
#include "mcboost/dataset.hpp"
#include "mcboost/model.hpp"

namespace mcboost {

// Sparse form of delta_h for one variable j = (class c, slot t): the flat
// constraint indices (i * K + y) where h_{c,t}(x_i) * ([y_i == c] - [y == c])
// is +1 or -1. Constraints with value 0 are not stored.
struct VariableCodes {
  std::vector<std::uint32_t> plus;
  std::vector<std::uint32_t> minus;
};

VariableCodes encode_variable(const Stump& stump, ClassId c, const Dataset& data);

// Delta codes for every variable of a model, addressed by the class-major
// variable index. Learners are immutable once encoded; sync() encodes the
// ones appended since the last call.
class DeltaCodes {
 public:
  DeltaCodes() = default;
  explicit DeltaCodes(int num_classes) : per_class_(static_cast<std::size_t>(num_classes)) {}

  void sync(const Model& model, const Dataset& data);

  std::size_t num_variables() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  const VariableCodes& operator[](std::size_t j) const;
  std::size_t total_entries() const noexcept;

 private:
  std::vector<std::vector<VariableCodes>> per_class_;
  std::vector<std::size_t> offsets_;  // K + 1 prefix sums
};

DeltaCodes build_delta_codes(const Model& model, const Dataset& data);

// mu(i, y) = exp(-w^T delta_h_i(y)) = exp(-margin(i, y)). Entries (i, y_i)
// are held at 0 and never read.
class MuCache {
 public:
  MuCache() = default;
  explicit MuCache(const Dataset& data);

  double operator()(std::size_t i, ClassId y) const { return values_(i, y); }
  double flat(std::size_t k) const noexcept { return values_.values()[k]; }
  double& flat(std::size_t k) noexcept { return values_.values()[k]; }
  const ConstraintMatrix& matrix() const noexcept { return values_; }

  // Sum over the valid entries.
  double total(std::span<const ClassId> labels) const;

 private:
  ConstraintMatrix values_;
};

MuCache init_mu(std::span<const double> weights, const DeltaCodes& codes, const Dataset& data);
MuCache init_mu(const Model& model, const Dataset& data);

struct EdgeSums {
  double minus = 0.0;  // V-: sum over D-_j of mu * exp(-w_j)
  double plus = 0.0;   // V+: sum over D+_j of mu * exp(+w_j)
};

EdgeSums edge_sums(const VariableCodes& codes, const MuCache& mu, double w_j);

// Global minimizer over w >= 0 of w + (C/p)(V- e^w + V+ e^-w).
double closed_form_update(double v_minus, double v_plus, double C, double p);

// Large-C limit max{0, log(V+/V-) / 2}, capped at kMarginClamp.
double stagewise_update(double v_minus, double v_plus);

void update_mu(MuCache& mu, const VariableCodes& codes, double w_old, double w_new);

// KKT violation of every variable at the point described by (weights, mu).
std::vector<double> violations(const MuCache& mu, std::span<const double> weights,
                               const DeltaCodes& codes, double C, double p);

// Objective value computed from a consistent mu.
double objective_from_mu(const MuCache& mu, std::span<const double> weights,
                         std::span<const ClassId> labels, double C);

enum class SolverExit { converged, max_iterations };

const char* to_string(SolverExit exit) noexcept;

struct SolveStats {
  std::size_t picks = 0;
  int working_set_iterations = 0;
  double max_violation = 0.0;
  double wall_ms = 0.0;
  SolverExit exit = SolverExit::converged;
};

struct CoordinateUpdate {
  std::size_t variable = 0;
  double w_old = 0.0;
  double w_new = 0.0;
  EdgeSums sums;
  std::span<const double> weights;  // after the update
};

using UpdateObserver = std::function<void(const CoordinateUpdate&)>;

// Coordinate-descent solver for the restricted master problem. One instance
// lives for a whole training run: the delta codes grow as learners are
// appended and the random stream continues between solves.
class FcdSolver {
 public:
  FcdSolver(const Dataset& data, const TrainConfig& config);

  // Re-optimizes the weights of model, starting from its current weights.
  // new_variables seeds the first working set and is swept in order.
  SolveStats solve(Model& model, std::span<const std::size_t> new_variables,
                   const UpdateObserver& observer = {});

  const DeltaCodes& codes() const noexcept { return codes_; }
  const MuCache& mu() const noexcept { return mu_; }
  std::span<const double> weights() const noexcept { return weights_; }

  // Rebuilds mu from the current weights, discarding incremental drift.
  void refresh_mu();

 private:
  EdgeSums update_coordinate(std::size_t j);

  const Dataset& data_;
  TrainConfig config_;
  double p_;
  DeltaCodes codes_;
  MuCache mu_;
  std::vector<double> weights_;
  std::mt19937_64 rng_;
};

// One-shot solve of a fixed model.
SolveStats solve(Model& model, const Dataset& data, const TrainConfig& config,
                 std::span<const std::size_t> new_variables);

}  // namespace mcboost
