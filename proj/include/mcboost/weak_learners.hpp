#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcboost/dataset.hpp"
#include "mcboost/model.hpp"

namespace mcboost {

// Per-example weights u for target class c, chosen so that the
// column-generation edge of a stump h equals sum_i u_i h(x_i):
//   u_i = sum_{y != y_i} lambda(i, y)  if y_i == c
//   u_i = -lambda(i, c)                otherwise
// Throws std::invalid_argument on a negative dual entry.
std::vector<double> signed_weights(const ConstraintMatrix& lambda,
                                   std::span<const ClassId> labels, ClassId c);

// Sorted feature orders and candidate thresholds, built once per dataset.
// Candidates per feature are a sentinel below the minimum (the constant
// stump) followed by midpoints between consecutive distinct values.
class StumpSearchIndex {
 public:
  explicit StumpSearchIndex(const Dataset& data);

  std::size_t num_examples() const noexcept { return num_examples_; }
  std::size_t num_features() const noexcept { return features_.size(); }

  std::span<const std::size_t> order(std::size_t f) const { return features_[f].order; }
  std::span<const double> thresholds(std::size_t f) const { return features_[f].thresholds; }
  // Number of examples (in sorted order) at or below each threshold.
  std::span<const std::size_t> split_counts(std::size_t f) const { return features_[f].counts; }

 private:
  struct FeatureIndex {
    std::vector<std::size_t> order;
    std::vector<double> thresholds;
    std::vector<std::size_t> counts;
  };
  std::vector<FeatureIndex> features_;
  std::size_t num_examples_ = 0;
};

struct StumpCandidate {
  Stump stump;
  double edge = 0.0;
};

struct SharedCandidate {
  Stump stump;
  ClassId target_class = 0;
  double edge = 0.0;
};

// Stump maximizing sum_i u_i h(x_i). Ties go to the smaller feature, then
// the smaller threshold, then polarity +1.
StumpCandidate best_stump(std::span<const double> u, const StumpSearchIndex& index);

// One best stump per class, element c for signed_weights(lambda, c).
std::vector<StumpCandidate> generate_class_wise(const Dataset& data,
                                                const ConstraintMatrix& lambda,
                                                const StumpSearchIndex& index);

// Best (stump, class) pair over all classes; ties go to the smaller class.
SharedCandidate generate_shared(const Dataset& data, const ConstraintMatrix& lambda,
                                const StumpSearchIndex& index);

}  // namespace mcboost
