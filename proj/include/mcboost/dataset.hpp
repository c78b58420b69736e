#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcboost {

// Class indices are 0-based: a K-class problem uses labels 0..K-1.
using ClassId = int;

// Dense training/test data. Features are stored row-major, one row per
// example.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> features, std::size_t num_features,
          std::vector<ClassId> labels, int num_classes);

  std::size_t num_examples() const noexcept { return labels_.size(); }
  std::size_t num_features() const noexcept { return num_features_; }
  int num_classes() const noexcept { return num_classes_; }

  // p = m * (K - 1): the number of (example, wrong class) constraints.
  std::size_t num_constraints() const noexcept {
    return num_examples() * static_cast<std::size_t>(num_classes_ - 1);
  }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * num_features_, num_features_};
  }
  double value(std::size_t i, std::size_t f) const {
    return features_[i * num_features_ + f];
  }
  ClassId label(std::size_t i) const { return labels_[i]; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  std::span<const double> features() const noexcept { return features_; }

  std::vector<std::size_t> class_counts() const;

  // Throws DataError if some class in 0..K-1 has no example.
  void require_all_classes() const;

  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<double> features_;
  std::vector<ClassId> labels_;
  std::size_t num_features_ = 0;
  int num_classes_ = 0;
};

// An m x K table indexed by (example, class). Used for the dual variables
// and the exponential-loss cache; entries (i, y_i) are unused.
class ConstraintMatrix {
 public:
  ConstraintMatrix() = default;
  ConstraintMatrix(std::size_t rows, int cols, double fill = 0.0)
      : values_(rows * static_cast<std::size_t>(cols), fill),
        rows_(rows),
        cols_(cols) {}

  double& operator()(std::size_t i, ClassId y) {
    return values_[i * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(y)];
  }
  double operator()(std::size_t i, ClassId y) const {
    return values_[i * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(y)];
  }

  // Flat index of (i, y), the form used by the delta-code tables.
  std::size_t flat_index(std::size_t i, ClassId y) const noexcept {
    return i * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(y);
  }

  std::size_t rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
  std::size_t rows_ = 0;
  int cols_ = 0;
};

}  // namespace mcboost
