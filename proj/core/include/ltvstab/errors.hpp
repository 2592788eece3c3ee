#pragma once

#include <stdexcept>

namespace ltvstab {

/// Malformed input: bad description files, dimension mismatches, out-of-horizon
/// queries, invalid parameter combinations. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown inside an algorithm (lost positive definiteness,
/// singular pivot, diverging series). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ltvstab
