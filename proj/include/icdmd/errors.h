#pragma once

#include <stdexcept>
#include <string>

namespace icdmd {

/// Bad input shape, value, or name supplied by the caller.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical kernel failed (SVD non-convergence, non-finite output).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraint matrices violate the compatibility or redundancy assumptions.
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The eigenspace at the requested eigenvalue cannot carry the requested
/// number of dual functions.
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace icdmd
