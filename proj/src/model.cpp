#include "mcboost/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcboost {

double exp_neg_margin(double margin) noexcept {
  return std::exp(-std::clamp(margin, -kMarginClamp, kMarginClamp));
}

int Stump::evaluate(std::span<const double> x) const {
  if (feature >= x.size()) {
    throw std::out_of_range("stump feature " + std::to_string(feature) +
                            " out of range for row of size " + std::to_string(x.size()));
  }
  return (*this)(x);
}

Model::Model(int num_classes, std::size_t num_features)
    : classes_(static_cast<std::size_t>(num_classes)), num_features_(num_features) {
  if (num_classes < 2) throw std::invalid_argument("model needs at least 2 classes");
}

std::size_t Model::append(ClassId c, const Stump& stump, double weight) {
  auto& ens = classes_.at(static_cast<std::size_t>(c));
  ens.stumps.push_back(stump);
  ens.weights.push_back(weight);
  return ens.stumps.size() - 1;
}

double Model::weight(ClassId c, std::size_t slot) const {
  return classes_.at(static_cast<std::size_t>(c)).weights.at(slot);
}

void Model::set_weight(ClassId c, std::size_t slot, double w) {
  classes_.at(static_cast<std::size_t>(c)).weights.at(slot) = w;
}

std::size_t Model::num_variables() const noexcept {
  std::size_t n = 0;
  for (const auto& ens : classes_) n += ens.weights.size();
  return n;
}

std::size_t Model::variable_index(ClassId c, std::size_t slot) const {
  std::size_t j = 0;
  for (ClassId k = 0; k < c; ++k) j += classes_.at(static_cast<std::size_t>(k)).weights.size();
  if (slot >= classes_.at(static_cast<std::size_t>(c)).weights.size()) {
    throw std::out_of_range("slot out of range");
  }
  return j + slot;
}

std::pair<ClassId, std::size_t> Model::locate(std::size_t j) const {
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const std::size_t n = classes_[c].weights.size();
    if (j < n) return {static_cast<ClassId>(c), j};
    j -= n;
  }
  throw std::out_of_range("variable index out of range");
}

std::vector<double> Model::flat_weights() const {
  std::vector<double> w;
  w.reserve(num_variables());
  for (const auto& ens : classes_) w.insert(w.end(), ens.weights.begin(), ens.weights.end());
  return w;
}

void Model::set_flat_weights(std::span<const double> w) {
  if (w.size() != num_variables()) throw std::invalid_argument("weight vector size mismatch");
  auto it = w.begin();
  for (auto& ens : classes_) {
    std::copy_n(it, ens.weights.size(), ens.weights.begin());
    it += static_cast<std::ptrdiff_t>(ens.weights.size());
  }
}

void Model::validate() const {
  if (classes_.size() < 2) throw std::invalid_argument("model needs at least 2 classes");
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto& ens = classes_[c];
    const std::string where = "class " + std::to_string(c);
    if (ens.stumps.size() != ens.weights.size()) {
      throw std::invalid_argument(where + ": stump and weight counts differ");
    }
    for (std::size_t t = 0; t < ens.stumps.size(); ++t) {
      const Stump& s = ens.stumps[t];
      if (s.feature >= num_features_) {
        throw std::invalid_argument(where + " stump " + std::to_string(t) + ": feature out of range");
      }
      if (s.polarity != 1 && s.polarity != -1) {
        throw std::invalid_argument(where + " stump " + std::to_string(t) + ": polarity must be +-1");
      }
      if (!std::isfinite(s.threshold)) {
        throw std::invalid_argument(where + " stump " + std::to_string(t) + ": non-finite threshold");
      }
      if (!(ens.weights[t] >= 0.0) || !std::isfinite(ens.weights[t])) {
        throw std::invalid_argument(where + " weight " + std::to_string(t) +
                                    ": must be finite and non-negative");
      }
    }
  }
}

double class_score(const Model& model, std::span<const double> x, ClassId c) {
  if (c < 0 || c >= model.num_classes()) throw std::out_of_range("class index out of range");
  const auto& ens = model.ensemble(c);
  double score = 0.0;
  for (std::size_t t = 0; t < ens.stumps.size(); ++t) {
    score += ens.weights[t] * ens.stumps[t].evaluate(x);
  }
  return score;
}

std::vector<double> class_scores(const Model& model, std::span<const double> x) {
  std::vector<double> scores(static_cast<std::size_t>(model.num_classes()));
  for (ClassId c = 0; c < model.num_classes(); ++c) {
    scores[static_cast<std::size_t>(c)] = class_score(model, x, c);
  }
  return scores;
}

ClassId predict(const Model& model, std::span<const double> x) {
  const auto scores = class_scores(model, x);
  // max_element returns the first maximum, which is the tie-break rule.
  return static_cast<ClassId>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double margin(const Model& model, const Dataset& data, std::size_t i, ClassId y) {
  const ClassId yi = data.label(i);
  if (y == yi) throw std::invalid_argument("margin is undefined for the true class");
  const auto x = data.row(i);
  return class_score(model, x, yi) - class_score(model, x, y);
}

double primal_objective(const Model& model, const Dataset& data, double C) {
  double l1 = 0.0;
  for (double w : model.flat_weights()) l1 += w;
  double loss = 0.0;
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    const auto scores = class_scores(model, data.row(i));
    const double own = scores[static_cast<std::size_t>(data.label(i))];
    for (ClassId y = 0; y < data.num_classes(); ++y) {
      if (y == data.label(i)) continue;
      loss += exp_neg_margin(own - scores[static_cast<std::size_t>(y)]);
    }
  }
  return l1 + C / static_cast<double>(data.num_constraints()) * loss;
}

double error_rate(const Model& model, const Dataset& data) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    if (predict(model, data.row(i)) != data.label(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.num_examples());
}

double zero_weight_fraction(const Model& model, double tol) {
  const auto w = model.flat_weights();
  if (w.empty()) return 0.0;
  const auto zeros = std::count_if(w.begin(), w.end(), [tol](double v) { return std::abs(v) < tol; });
  return static_cast<double>(zeros) / static_cast<double>(w.size());
}

}  // namespace mcboost
