#include "mcboost/weak_learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mcboost {

std::vector<double> signed_weights(const ConstraintMatrix& lambda, std::span<const ClassId> labels,
                                   ClassId c) {
  if (lambda.rows() != labels.size()) throw std::invalid_argument("dual matrix has wrong row count");
  const int K = lambda.cols();
  std::vector<double> u(labels.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const ClassId yi = labels[i];
    if (yi == c) {
      double sum = 0.0;
      for (ClassId y = 0; y < K; ++y) {
        if (y == yi) continue;
        if (lambda(i, y) < 0.0) throw std::invalid_argument("negative dual variable");
        sum += lambda(i, y);
      }
      u[i] = sum;
    } else {
      if (lambda(i, c) < 0.0) throw std::invalid_argument("negative dual variable");
      u[i] = -lambda(i, c);
    }
  }
  return u;
}

StumpSearchIndex::StumpSearchIndex(const Dataset& data) : num_examples_(data.num_examples()) {
  const std::size_t m = data.num_examples();
  features_.resize(data.num_features());
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    auto& fi = features_[f];
    fi.order.resize(m);
    std::iota(fi.order.begin(), fi.order.end(), std::size_t{0});
    std::stable_sort(fi.order.begin(), fi.order.end(), [&](std::size_t a, std::size_t b) {
      return data.value(a, f) < data.value(b, f);
    });

    const double lowest = data.value(fi.order.front(), f);
    fi.thresholds.push_back(lowest - std::max(1.0, std::abs(lowest)));
    fi.counts.push_back(0);
    for (std::size_t r = 0; r + 1 < m; ++r) {
      const double a = data.value(fi.order[r], f);
      const double b = data.value(fi.order[r + 1], f);
      if (!(a < b)) continue;
      double mid = 0.5 * a + 0.5 * b;
      // Adjacent doubles can round the midpoint onto either endpoint; the
      // split needs a <= threshold < b.
      if (mid >= b || mid < a) mid = a;
      fi.thresholds.push_back(mid);
      fi.counts.push_back(r + 1);
    }
  }
}

namespace {

struct FeatureBest {
  std::size_t threshold_index = 0;
  int polarity = 1;
  double edge = -std::numeric_limits<double>::infinity();
};

FeatureBest scan_feature(std::span<const double> u, double total, std::span<const std::size_t> order,
                         std::span<const std::size_t> counts) {
  FeatureBest best;
  double below = 0.0;  // sum of u over examples at or below the threshold
  std::size_t pos = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (; pos < counts[k]; ++pos) below += u[order[pos]];
    const double edge = total - 2.0 * below;
    if (edge > best.edge) best = {k, 1, edge};
    if (-edge > best.edge) best = {k, -1, -edge};
  }
  return best;
}

}  // namespace

StumpCandidate best_stump(std::span<const double> u, const StumpSearchIndex& index) {
  if (u.size() != index.num_examples()) throw std::invalid_argument("weight vector size mismatch");
  const double total = std::accumulate(u.begin(), u.end(), 0.0);
  StumpCandidate best{{}, -std::numeric_limits<double>::infinity()};
  for (std::size_t f = 0; f < index.num_features(); ++f) {
    const FeatureBest fb = scan_feature(u, total, index.order(f), index.split_counts(f));
    if (fb.edge > best.edge) {
      best.stump = Stump{f, index.thresholds(f)[fb.threshold_index], fb.polarity};
      best.edge = fb.edge;
    }
  }
  return best;
}

std::vector<StumpCandidate> generate_class_wise(const Dataset& data, const ConstraintMatrix& lambda,
                                                const StumpSearchIndex& index) {
  std::vector<StumpCandidate> out;
  out.reserve(static_cast<std::size_t>(data.num_classes()));
  for (ClassId c = 0; c < data.num_classes(); ++c) {
    out.push_back(best_stump(signed_weights(lambda, data.labels(), c), index));
  }
  return out;
}

SharedCandidate generate_shared(const Dataset& data, const ConstraintMatrix& lambda,
                                const StumpSearchIndex& index) {
  const auto per_class = generate_class_wise(data, lambda, index);
  SharedCandidate best{per_class.front().stump, 0, per_class.front().edge};
  for (std::size_t c = 1; c < per_class.size(); ++c) {
    if (per_class[c].edge > best.edge) {
      best = {per_class[c].stump, static_cast<ClassId>(c), per_class[c].edge};
    }
  }
  return best;
}

}  // namespace mcboost
