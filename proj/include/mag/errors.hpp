#pragma once

#include <stdexcept>
#include <string>

namespace mag {

// Bad input: violated precondition, malformed data, inconsistent sizes.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Request exceeds what an enumeration-based routine supports (e.g. N! blowup).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative or stepping routine produced a non-finite value or did not
// converge within its cap.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mag
