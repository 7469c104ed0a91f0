#pragma once

#include <stdexcept>
#include <string>

namespace stylespace {

// Base for all toolkit errors so callers can catch one type at the CLI edge.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (JSONL/CSV); message carries file and line number.
struct ParseError : Error {
    using Error::Error;
};

// Structural violations: unknown edge endpoints, duplicate ids, mixed
// presence of planted styles.
struct IntegrityError : Error {
    using Error::Error;
};

// Vector length mismatches.
struct DimensionError : Error {
    using Error::Error;
};

// Empty or degenerate inputs: empty catalog, no positive candidates,
// single-class evaluation sets.
struct EmptyInputError : Error {
    using Error::Error;
};

// Non-finite values, training divergence, infeasible calibration.
struct NumericError : Error {
    using Error::Error;
};

// Unknown item ids or categories at lookup time.
struct LookupError : Error {
    using Error::Error;
};

// Invalid parameters or configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace stylespace
