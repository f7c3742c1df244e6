#pragma once

#include <stdexcept>
#include <string>

namespace thermoshift {

/// Malformed input: shift/potential specs, out-of-range symbols or levels.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A word handed to an operation that requires an allowable word.
class NotAllowable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A combinatorial cap (word count, pair count, relation count) was hit.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structural precondition failed at the current truncation, e.g. every
/// ladder level is reducible or no connector certificate exists.
class ConditionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thermoshift
