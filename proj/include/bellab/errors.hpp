#pragma once

#include <stdexcept>
#include <string>

namespace bellab {

/// A linear combination of states cancelled to the zero vector.
class NullStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Amplitudes whose squared norm differs from one.
class UnnormalizedStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A model, grid or parameter set that violates its stated invariants.
class InvalidModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace bellab
