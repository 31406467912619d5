#pragma once

#include <stdexcept>
#include <string>

namespace snr_sentry {

/// Operand shapes or sizes do not agree (y vs. X, index out of range, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A column submatrix is numerically rank deficient where full rank is required.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Subset enumeration would visit more candidates than the configured guard.
class EnumerationGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a design matrix (unit norm, orthonormality, ERC) failed.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace snr_sentry
