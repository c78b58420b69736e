#pragma once

#include <stdexcept>

namespace mcboost {

// Malformed input files or data that cannot be trained on. The message
// carries the location (file, row, column, field) of the problem.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcboost
