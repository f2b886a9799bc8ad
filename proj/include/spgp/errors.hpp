#pragma once

#include <stdexcept>
#include <string>

namespace spgp {

/// Bad input: wrong shapes, out-of-range settings, malformed files.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// A factorization or evaluation that could not be completed.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace spgp
