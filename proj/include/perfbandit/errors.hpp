#pragma once

#include <stdexcept>
#include <string>

namespace perfbandit {

/// Malformed or out-of-range configuration (bad file, bad value, broken invariant).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not agree, e.g. a shift matrix whose column count differs from the base
/// distribution dimension.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input too large for an exhaustive evaluator.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace perfbandit
