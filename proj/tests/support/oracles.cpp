#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

namespace mcboost::testing {

int raw_stump(const Stump& s, std::span<const double> x) {
  return x[s.feature] > s.threshold ? s.polarity : -s.polarity;
}

DeltaTensor naive_delta(const Model& model, const Dataset& data) {
  DeltaTensor delta;
  const int K = data.num_classes();
  for (ClassId c = 0; c < model.num_classes(); ++c) {
    for (const Stump& s : model.ensemble(c).stumps) {
      std::vector<std::vector<int>> table(data.num_examples(), std::vector<int>(static_cast<std::size_t>(K), 0));
      for (std::size_t i = 0; i < data.num_examples(); ++i) {
        const int h = raw_stump(s, data.row(i));
        const ClassId yi = data.label(i);
        for (ClassId y = 0; y < K; ++y) {
          if (y == yi) continue;
          table[i][static_cast<std::size_t>(y)] = h * ((yi == c ? 1 : 0) - (y == c ? 1 : 0));
        }
      }
      delta.push_back(std::move(table));
    }
  }
  return delta;
}

namespace {

double score(const Model& model, std::span<const double> weights, std::span<const double> x, ClassId c) {
  std::size_t j = 0;
  for (ClassId k = 0; k < c; ++k) j += model.ensemble(k).stumps.size();
  double s = 0.0;
  for (const Stump& st : model.ensemble(c).stumps) s += weights[j++] * raw_stump(st, x);
  return s;
}

double clamped_exp(double neg_margin) {
  return std::exp(std::clamp(neg_margin, -kMarginClamp, kMarginClamp));
}

}  // namespace

double naive_margin(const Model& model, std::span<const double> weights, const Dataset& data,
                    std::size_t i, ClassId y) {
  return score(model, weights, data.row(i), data.label(i)) - score(model, weights, data.row(i), y);
}

double naive_objective(const Model& model, std::span<const double> weights, const Dataset& data, double C) {
  double l1 = 0.0;
  for (double w : weights) l1 += std::abs(w);
  double loss = 0.0;
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    for (ClassId y = 0; y < data.num_classes(); ++y) {
      if (y == data.label(i)) continue;
      loss += clamped_exp(-naive_margin(model, weights, data, i, y));
    }
  }
  const double p = static_cast<double>(data.num_examples()) * (data.num_classes() - 1);
  return l1 + C / p * loss;
}

double naive_objective(const Model& model, const Dataset& data, double C) {
  const auto w = model.flat_weights();
  return naive_objective(model, w, data, C);
}

long double single_variable_objective(long double w, long double v_minus, long double v_plus,
                                      long double C, long double p) {
  return w + C / p * (v_minus * std::exp(w) + v_plus * std::exp(-w));
}

double golden_section_update(double v_minus, double v_plus, double C, double p) {
  // The minimizer never exceeds log(1 + C V+ / p).
  long double lo = 0.0L;
  long double hi = std::log1p(static_cast<long double>(C) * v_plus / p) + 1.0L;
  const long double inv_phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  auto f = [&](long double w) { return single_variable_objective(w, v_minus, v_plus, C, p); };
  long double a = hi - inv_phi * (hi - lo);
  long double b = lo + inv_phi * (hi - lo);
  long double fa = f(a);
  long double fb = f(b);
  for (int it = 0; it < 400 && hi - lo > 1e-15L; ++it) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = f(b);
    }
  }
  const long double mid = (lo + hi) / 2.0L;
  // The bracket collapses onto 0 when the constraint is active.
  return f(0.0L) <= f(mid) ? 0.0 : static_cast<double>(mid);
}

double naive_edge(const Dataset& data, const ConstraintMatrix& lambda, ClassId c, const Stump& s) {
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    const int h = raw_stump(s, data.row(i));
    const ClassId yi = data.label(i);
    for (ClassId y = 0; y < data.num_classes(); ++y) {
      if (y == yi) continue;
      if (yi == c) first += lambda(i, y) * h;
      if (y == c) second += lambda(i, y) * h;
    }
  }
  return first - second;
}

StumpCandidate brute_force_stump(const Dataset& data, std::span<const double> u) {
  StumpCandidate best{{}, -std::numeric_limits<double>::infinity()};
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < data.num_examples(); ++i) values.push_back(data.value(i, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> thresholds{values.front() - std::max(1.0, std::abs(values.front()))};
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      double mid = 0.5 * values[k] + 0.5 * values[k + 1];
      if (mid >= values[k + 1] || mid < values[k]) mid = values[k];
      thresholds.push_back(mid);
    }
    for (double t : thresholds) {
      for (int pol : {1, -1}) {
        const Stump s{f, t, pol};
        double edge = 0.0;
        for (std::size_t i = 0; i < data.num_examples(); ++i) edge += u[i] * raw_stump(s, data.row(i));
        if (edge > best.edge) best = {s, edge};
      }
    }
  }
  return best;
}

ReferenceSolution projected_gradient_solve(const Model& model, const Dataset& data, double C,
                                           double tolerance, int max_iterations) {
  const DeltaTensor delta = naive_delta(model, data);
  const std::size_t n = delta.size();
  const int K = data.num_classes();
  const double scale = C / (static_cast<double>(data.num_examples()) * (K - 1));

  // Dense constraint-by-variable matrix of the non-trivial constraints.
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    for (ClassId y = 0; y < K; ++y) {
      if (y == data.label(i)) continue;
      std::vector<double> r(n);
      for (std::size_t j = 0; j < n; ++j) r[j] = delta[j][i][static_cast<std::size_t>(y)];
      rows.push_back(std::move(r));
    }
  }

  auto evaluate = [&](const std::vector<double>& w, std::vector<double>* grad) {
    double value = 0.0;
    for (double x : w) value += x;
    if (grad) grad->assign(n, 1.0);
    for (const auto& r : rows) {
      double m = 0.0;
      for (std::size_t j = 0; j < n; ++j) m += r[j] * w[j];
      const double e = clamped_exp(-m);
      value += scale * e;
      if (grad) {
        for (std::size_t j = 0; j < n; ++j) (*grad)[j] -= scale * e * r[j];
      }
    }
    return value;
  };
  auto projected_step_norm = [&](const std::vector<double>& w, const std::vector<double>& g) {
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(std::max(0.0, w[j] - g[j]) - w[j]));
    return worst;
  };

  std::vector<double> w(model.flat_weights().size(), 0.0);
  std::vector<double> g;
  double fw = evaluate(w, &g);
  std::deque<double> history{fw};
  double alpha = 1.0;
  ReferenceSolution out;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (projected_step_norm(w, g) <= tolerance) break;
    std::vector<double> d(n);
    double slope = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = std::max(0.0, w[j] - alpha * g[j]) - w[j];
      slope += g[j] * d[j];
    }
    const double reference = *std::max_element(history.begin(), history.end());
    double step = 1.0;
    std::vector<double> trial(n);
    double ft = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = std::max(0.0, w[j] + step * d[j]);
      ft = evaluate(trial, nullptr);
      if (ft <= reference + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    std::vector<double> gt;
    ft = evaluate(trial, &gt);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = trial[j] - w[j];
      ss += s * s;
      sy += s * (gt[j] - g[j]);
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 1e12;
    if (ss == 0.0) break;
    w = std::move(trial);
    g = std::move(gt);
    fw = ft;
    history.push_back(fw);
    if (history.size() > 10) history.pop_front();
  }
  out.weights = w;
  out.objective = fw;
  out.projected_gradient = projected_step_norm(w, g);
  out.iterations = it;
  return out;
}

Dataset random_dataset(std::size_t m, std::size_t d, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(m * d);
  for (double& v : x) v = unit(rng);
  std::vector<ClassId> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = static_cast<ClassId>(i % static_cast<std::size_t>(K));
  std::shuffle(y.begin(), y.end(), rng);
  return Dataset(std::move(x), d, std::move(y), K);
}

Dataset gaussian_blobs(std::size_t m_per_class, int K, std::size_t d, double radius, double sigma,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> x;
  std::vector<ClassId> y;
  for (std::size_t i = 0; i < m_per_class; ++i) {
    for (ClassId c = 0; c < K; ++c) {
      const double angle = 2.0 * std::numbers::pi * c / K;
      for (std::size_t f = 0; f < d; ++f) {
        double center = 0.0;
        if (f == 0) center = radius * std::cos(angle);
        if (f == 1) center = radius * std::sin(angle);
        x.push_back(center + noise(rng));
      }
      y.push_back(c);
    }
  }
  return Dataset(std::move(x), d, std::move(y), K);
}

Stump random_stump(const Dataset& data, std::uint64_t& state) {
  std::mt19937_64 rng(state++);
  const std::size_t f = std::uniform_int_distribution<std::size_t>(0, data.num_features() - 1)(rng);
  const std::size_t i = std::uniform_int_distribution<std::size_t>(0, data.num_examples() - 1)(rng);
  const int pol = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
  return Stump{f, data.value(i, f), pol};
}

Model random_model(const Dataset& data, std::size_t stumps_per_class, std::uint64_t seed, double max_weight,
                   double zero_fraction) {
  Model model(data.num_classes(), data.num_features());
  std::mt19937_64 rng(seed);
  std::uint64_t state = seed * 7919 + 1;
  std::uniform_real_distribution<double> weight(0.0, max_weight);
  std::bernoulli_distribution zero(zero_fraction);
  for (ClassId c = 0; c < data.num_classes(); ++c) {
    for (std::size_t t = 0; t < stumps_per_class; ++t) {
      model.append(c, random_stump(data, state), zero(rng) ? 0.0 : weight(rng));
    }
  }
  return model;
}

ConstraintMatrix random_duals(const Dataset& data, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ConstraintMatrix lambda(data.num_examples(), data.num_classes(), 0.0);
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    for (ClassId y = 0; y < data.num_classes(); ++y) {
      if (y != data.label(i)) lambda(i, y) = unit(rng);
    }
  }
  return lambda;
}

}  // namespace mcboost::testing
