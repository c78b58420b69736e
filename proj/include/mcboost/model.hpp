#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mcboost/dataset.hpp"

namespace mcboost {

// Margins are clamped to [-kMarginClamp, kMarginClamp] before
// exponentiation so exp(-margin) stays finite.
inline constexpr double kMarginClamp = 500.0;

// exp(-clamp(margin)).
double exp_neg_margin(double margin) noexcept;

// Decision stump: polarity if x[feature] > threshold, -polarity otherwise.
struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;

  // Throws std::out_of_range if feature is outside the row.
  int evaluate(std::span<const double> x) const;

  // Unchecked; the caller guarantees feature < x.size().
  int operator()(std::span<const double> x) const noexcept {
    return x[feature] > threshold ? polarity : -polarity;
  }

  friend bool operator==(const Stump&, const Stump&) = default;
};

struct ClassEnsemble {
  std::vector<Stump> stumps;
  std::vector<double> weights;
};

// K per-class weighted stump lists. Weights are addressed either per
// (class, slot) or through a global variable index j that enumerates
// class-major: all of class 0's slots, then class 1's, and so on.
class Model {
 public:
  Model() = default;
  Model(int num_classes, std::size_t num_features);

  int num_classes() const noexcept { return static_cast<int>(classes_.size()); }
  std::size_t num_features() const noexcept { return num_features_; }

  const ClassEnsemble& ensemble(ClassId c) const { return classes_.at(static_cast<std::size_t>(c)); }
  std::span<const ClassEnsemble> ensembles() const noexcept { return classes_; }

  // Appends a learner to class c and returns its slot.
  std::size_t append(ClassId c, const Stump& stump, double weight = 0.0);

  double weight(ClassId c, std::size_t slot) const;
  void set_weight(ClassId c, std::size_t slot, double w);

  std::size_t num_variables() const noexcept;
  std::size_t variable_index(ClassId c, std::size_t slot) const;
  std::pair<ClassId, std::size_t> locate(std::size_t j) const;

  std::vector<double> flat_weights() const;
  void set_flat_weights(std::span<const double> w);

  // Structural checks: weight/stump counts agree, weights are finite and
  // non-negative, polarities are +-1, features are in range.
  void validate() const;

 private:
  std::vector<ClassEnsemble> classes_;
  std::size_t num_features_ = 0;
};

// F_c(x) = sum_t w_{c,t} h_{c,t}(x).
double class_score(const Model& model, std::span<const double> x, ClassId c);

std::vector<double> class_scores(const Model& model, std::span<const double> x);

// argmax_c F_c(x); ties go to the smallest class index.
ClassId predict(const Model& model, std::span<const double> x);

// F_{y_i}(x_i) - F_y(x_i). Throws std::invalid_argument if y == y_i.
double margin(const Model& model, const Dataset& data, std::size_t i, ClassId y);

// ||w||_1 + (C/p) sum_i sum_{y != y_i} exp(-margin(i, y)).
double primal_objective(const Model& model, const Dataset& data, double C);

double error_rate(const Model& model, const Dataset& data);

// Fraction of weights with |w| < tol; 0 for an empty model.
double zero_weight_fraction(const Model& model, double tol = 1e-8);

}  // namespace mcboost
