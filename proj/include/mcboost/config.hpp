#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace mcboost {

enum class Algorithm {
  class_wise,            // one new stump per class each iteration
  shared,                // one stump per iteration, shared by every class
  class_wise_stagewise,  // class_wise with only the new weights updated
};

// "cw", "shared", "cw-stagewise".
std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Regularization used by the stage-wise variant, which assumes a large C.
inline constexpr double kStagewiseC = 1e8;

struct TrainConfig {
  double C = 1e4;
  double epsilon = 0.1;
  int tau_max = 2;
  int max_cg_iterations = 500;
  double cg_rel_tolerance = 1e-5;  // 0 disables the objective test
  Algorithm algorithm = Algorithm::class_wise;
  std::uint64_t rng_seed = 0;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;

  // Stage-wise training always runs a single working-set iteration.
  int effective_tau_max() const noexcept {
    return algorithm == Algorithm::class_wise_stagewise ? 1 : tau_max;
  }
};

}  // namespace mcboost
