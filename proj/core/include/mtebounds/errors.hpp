#pragma once

#include <stdexcept>

namespace mtebounds {

// Rejected input: malformed files, schema mismatches, violated preconditions.
// The command line tool maps these to exit code 2.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure discovered mid-computation: denominator guards tripped
// where a value is required, infeasible programs, non-convergence, excessive
// resampling failures. The command line tool maps these to exit code 1.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtebounds
