#pragma once

#include <stdexcept>
#include <string>

namespace synthmix {

/// Precondition violation on a public operation (bad index, nonpositive
/// lambda, mismatched eigensystems, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a result (factorization failure,
/// too few usable bins for a fit, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// I/O failure; the message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace synthmix
