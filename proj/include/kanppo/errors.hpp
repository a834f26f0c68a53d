#pragma once

#include <stdexcept>

namespace kanppo {

// Bad usage or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required (diverged training,
// NaN gradients, ...). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kanppo
