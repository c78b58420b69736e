#include "mcboost/config.hpp"

#include <cmath>
#include <stdexcept>

namespace mcboost {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::class_wise: return "cw";
    case Algorithm::shared: return "shared";
    case Algorithm::class_wise_stagewise: return "cw-stagewise";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "cw") return Algorithm::class_wise;
  if (name == "shared") return Algorithm::shared;
  if (name == "cw-stagewise") return Algorithm::class_wise_stagewise;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (tau_max < 1) throw std::invalid_argument("tau_max must be at least 1");
  if (max_cg_iterations < 1) throw std::invalid_argument("max_cg_iterations must be at least 1");
  if (!(cg_rel_tolerance >= 0.0)) throw std::invalid_argument("cg_rel_tolerance must be non-negative");
}

}  // namespace mcboost
