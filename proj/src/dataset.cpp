#include "mcboost/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mcboost/error.hpp"

namespace mcboost {

Dataset::Dataset(std::vector<double> features, std::size_t num_features,
                 std::vector<ClassId> labels, int num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_features_(num_features),
      num_classes_(num_classes) {
  if (num_classes_ < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  if (labels_.empty()) throw std::invalid_argument("dataset needs at least 1 example");
  if (num_features_ == 0) throw std::invalid_argument("dataset needs at least 1 feature");
  if (features_.size() != labels_.size() * num_features_) {
    throw std::invalid_argument("feature matrix size does not match m * d");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      throw std::invalid_argument("label of example " + std::to_string(i) + " outside [0, K)");
    }
  }
  for (std::size_t k = 0; k < features_.size(); ++k) {
    if (!std::isfinite(features_[k])) {
      throw std::invalid_argument("non-finite feature at example " +
                                  std::to_string(k / num_features_) + ", feature " +
                                  std::to_string(k % num_features_));
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (ClassId y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

void Dataset::require_all_classes() const {
  const auto counts = class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw DataError("class " + std::to_string(c) + " has no training examples");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> features;
  std::vector<ClassId> labels;
  features.reserve(rows.size() * num_features_);
  labels.reserve(rows.size());
  for (std::size_t i : rows) {
    if (i >= num_examples()) throw std::out_of_range("subset row out of range");
    auto r = row(i);
    features.insert(features.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
  }
  return Dataset(std::move(features), num_features_, std::move(labels), num_classes_);
}

}  // namespace mcboost
