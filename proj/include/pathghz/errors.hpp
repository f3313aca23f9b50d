#pragma once

#include <stdexcept>
#include <string>

namespace pathghz {

// Bad inputs: malformed config, parameter ranges, mode-universe mismatches.
// Maps to CLI exit code 1.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical invariant did not hold (normalization, unitarity, oracle
// disagreement, structural mismatch of a conditional state).
// Maps to CLI exit code 2.
struct numeric_check_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pathghz
