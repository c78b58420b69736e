#include "mcboost/fcd_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcboost {

namespace {

const double kMuMin = std::exp(-kMarginClamp);
const double kMuMax = std::exp(kMarginClamp);

}  // namespace

VariableCodes encode_variable(const Stump& stump, ClassId c, const Dataset& data) {
  const std::size_t m = data.num_examples();
  const int K = data.num_classes();
  if (m * static_cast<std::size_t>(K) > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("too many constraints for 32-bit delta codes");
  }
  VariableCodes codes;
  for (std::size_t i = 0; i < m; ++i) {
    const int h = stump.evaluate(data.row(i));
    const ClassId yi = data.label(i);
    const auto base = static_cast<std::uint32_t>(i * static_cast<std::size_t>(K));
    if (yi == c) {
      // delta = h for every wrong class y.
      auto& list = h > 0 ? codes.plus : codes.minus;
      for (ClassId y = 0; y < K; ++y) {
        if (y != yi) list.push_back(base + static_cast<std::uint32_t>(y));
      }
    } else {
      // Only the constraint against class c is touched, with delta = -h.
      auto& list = h > 0 ? codes.minus : codes.plus;
      list.push_back(base + static_cast<std::uint32_t>(c));
    }
  }
  return codes;
}

void DeltaCodes::sync(const Model& model, const Dataset& data) {
  if (per_class_.size() != static_cast<std::size_t>(model.num_classes())) {
    throw std::invalid_argument("delta codes and model disagree on the number of classes");
  }
  offsets_.assign(per_class_.size() + 1, 0);
  for (std::size_t c = 0; c < per_class_.size(); ++c) {
    const auto& ens = model.ensemble(static_cast<ClassId>(c));
    auto& codes = per_class_[c];
    if (codes.size() > ens.stumps.size()) {
      throw std::invalid_argument("model lost learners since the last sync");
    }
    for (std::size_t t = codes.size(); t < ens.stumps.size(); ++t) {
      codes.push_back(encode_variable(ens.stumps[t], static_cast<ClassId>(c), data));
    }
    offsets_[c + 1] = offsets_[c] + codes.size();
  }
}

const VariableCodes& DeltaCodes::operator[](std::size_t j) const {
  if (j >= num_variables()) throw std::out_of_range("variable index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), j);
  const auto c = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return per_class_[c][j - offsets_[c]];
}

std::size_t DeltaCodes::total_entries() const noexcept {
  std::size_t n = 0;
  for (const auto& cls : per_class_) {
    for (const auto& v : cls) n += v.plus.size() + v.minus.size();
  }
  return n;
}

DeltaCodes build_delta_codes(const Model& model, const Dataset& data) {
  DeltaCodes codes(model.num_classes());
  codes.sync(model, data);
  return codes;
}

MuCache::MuCache(const Dataset& data) : values_(data.num_examples(), data.num_classes(), 1.0) {
  for (std::size_t i = 0; i < data.num_examples(); ++i) values_(i, data.label(i)) = 0.0;
}

double MuCache::total(std::span<const ClassId> labels) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.rows(); ++i) {
    for (ClassId y = 0; y < values_.cols(); ++y) {
      if (y != labels[i]) sum += values_(i, y);
    }
  }
  return sum;
}

MuCache init_mu(std::span<const double> weights, const DeltaCodes& codes, const Dataset& data) {
  if (weights.size() != codes.num_variables()) throw std::invalid_argument("weight vector size mismatch");
  // Accumulate -margin per constraint, then exponentiate once.
  std::vector<double> neg_margin(data.num_examples() * static_cast<std::size_t>(data.num_classes()), 0.0);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = weights[j];
    if (w == 0.0) continue;
    const auto& vc = codes[j];
    for (auto k : vc.plus) neg_margin[k] -= w;
    for (auto k : vc.minus) neg_margin[k] += w;
  }
  MuCache mu(data);
  const int K = data.num_classes();
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    for (ClassId y = 0; y < K; ++y) {
      if (y == data.label(i)) continue;
      const std::size_t k = i * static_cast<std::size_t>(K) + static_cast<std::size_t>(y);
      mu.flat(k) = exp_neg_margin(-neg_margin[k]);
    }
  }
  return mu;
}

MuCache init_mu(const Model& model, const Dataset& data) {
  const auto codes = build_delta_codes(model, data);
  return init_mu(model.flat_weights(), codes, data);
}

EdgeSums edge_sums(const VariableCodes& codes, const MuCache& mu, double w_j) {
  double minus = 0.0;
  double plus = 0.0;
  for (auto k : codes.minus) minus += mu.flat(k);
  for (auto k : codes.plus) plus += mu.flat(k);
  return {minus * std::exp(-w_j), plus * std::exp(w_j)};
}

double closed_form_update(double v_minus, double v_plus, double C, double p) {
  if (v_minus < 0.0 || v_plus < 0.0) throw std::invalid_argument("edge sums must be non-negative");
  if (!(C > 0.0) || !(p > 0.0)) throw std::invalid_argument("C and p must be positive");
  if (v_plus == 0.0) return 0.0;
  // log(sqrt(V+V- + r^2) - r) - log V- rewritten as log(V+ / (sqrt(V+V- + r^2) + r)),
  // which avoids cancellation for small V+V- and extends to V- = 0.
  const double r = p / (2.0 * C);
  const double s = std::sqrt(v_plus * v_minus + r * r);
  return std::max(0.0, std::log(v_plus / (s + r)));
}

double stagewise_update(double v_minus, double v_plus) {
  if (v_minus < 0.0 || v_plus < 0.0) throw std::invalid_argument("edge sums must be non-negative");
  if (v_plus == 0.0) return 0.0;
  if (v_minus == 0.0) return kMarginClamp;
  return std::clamp(0.5 * std::log(v_plus / v_minus), 0.0, kMarginClamp);
}

void update_mu(MuCache& mu, const VariableCodes& codes, double w_old, double w_new) {
  if (w_old == w_new) return;
  const double shrink = std::exp(w_old - w_new);
  const double grow = std::exp(w_new - w_old);
  for (auto k : codes.plus) mu.flat(k) = std::clamp(mu.flat(k) * shrink, kMuMin, kMuMax);
  for (auto k : codes.minus) mu.flat(k) = std::clamp(mu.flat(k) * grow, kMuMin, kMuMax);
}

std::vector<double> violations(const MuCache& mu, std::span<const double> weights,
                               const DeltaCodes& codes, double C, double p) {
  if (weights.size() != codes.num_variables()) throw std::invalid_argument("weight vector size mismatch");
  std::vector<double> theta(weights.size());
  const double scale = C / p;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const auto& vc = codes[j];
    double g = 0.0;
    for (auto k : vc.plus) g += mu.flat(k);
    for (auto k : vc.minus) g -= mu.flat(k);
    const double s = scale * g;
    theta[j] = weights[j] > 0.0 ? std::abs(1.0 - s) : std::max(0.0, s - 1.0);
  }
  return theta;
}

double objective_from_mu(const MuCache& mu, std::span<const double> weights,
                         std::span<const ClassId> labels, double C) {
  double l1 = 0.0;
  for (double w : weights) l1 += w;
  const double p = static_cast<double>(labels.size()) * (mu.matrix().cols() - 1);
  return l1 + C / p * mu.total(labels);
}

const char* to_string(SolverExit exit) noexcept {
  switch (exit) {
    case SolverExit::converged: return "converged";
    case SolverExit::max_iterations: return "max_iterations";
  }
  return "unknown";
}

FcdSolver::FcdSolver(const Dataset& data, const TrainConfig& config)
    : data_(data),
      config_(config),
      p_(static_cast<double>(data.num_constraints())),
      codes_(data.num_classes()),
      mu_(data),
      rng_(config.rng_seed) {
  config_.validate();
}

EdgeSums FcdSolver::update_coordinate(std::size_t j) {
  const auto& vc = codes_[j];
  const double w_old = weights_[j];
  const EdgeSums sums = edge_sums(vc, mu_, w_old);
  const double w_new = config_.algorithm == Algorithm::class_wise_stagewise
                           ? stagewise_update(sums.minus, sums.plus)
                           : closed_form_update(sums.minus, sums.plus, config_.C, p_);
  update_mu(mu_, vc, w_old, w_new);
  weights_[j] = w_new;
  return sums;
}

SolveStats FcdSolver::solve(Model& model, std::span<const std::size_t> new_variables,
                            const UpdateObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  codes_.sync(model, data_);
  weights_ = model.flat_weights();
  for (std::size_t j : new_variables) {
    if (j >= weights_.size()) throw std::out_of_range("new variable index out of range");
  }
  mu_ = init_mu(weights_, codes_, data_);

  SolveStats stats;
  std::vector<std::size_t> working(new_variables.begin(), new_variables.end());
  const int tau_max = config_.effective_tau_max();
  for (int tau = 1;; ++tau) {
    const std::size_t picks = working.size();
    for (std::size_t q = 0; q < picks; ++q) {
      std::size_t j = working[q];
      if (tau > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, working.size() - 1);
        j = working[pick(rng_)];
      }
      const double w_old = weights_[j];
      const EdgeSums sums = update_coordinate(j);
      if (observer) observer({j, w_old, weights_[j], sums, weights_});
    }
    stats.picks += picks;
    stats.working_set_iterations = tau;

    const auto theta = violations(mu_, weights_, codes_, config_.C, p_);
    working.clear();
    double worst = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (theta[j] > config_.epsilon) working.push_back(j);
      worst = std::max(worst, theta[j]);
    }
    stats.max_violation = worst;
    if (worst <= config_.epsilon) {
      stats.exit = SolverExit::converged;
      break;
    }
    if (tau >= tau_max) {
      stats.exit = SolverExit::max_iterations;
      break;
    }
  }

  model.set_flat_weights(weights_);
  stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

void FcdSolver::refresh_mu() { mu_ = init_mu(weights_, codes_, data_); }

SolveStats solve(Model& model, const Dataset& data, const TrainConfig& config,
                 std::span<const std::size_t> new_variables) {
  FcdSolver solver(data, config);
  return solver.solve(model, new_variables);
}

}  // namespace mcboost
