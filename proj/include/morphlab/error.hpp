#pragma once

#include <stdexcept>
#include <string>

namespace morphlab {

// Malformed input: bad shapes, corrupt files, schema violations.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric degeneracy the caller must resolve (zero-norm or antipodal rows).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration gaps, e.g. an FRS with no threshold.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace morphlab
