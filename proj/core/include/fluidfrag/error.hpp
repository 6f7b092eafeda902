#pragma once

#include <stdexcept>
#include <string>

namespace fluidfrag {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (FCIDUMP, fragment files, configs).
struct ParseError : Error {
    using Error::Error;
};

// A stated precondition or type invariant does not hold.
struct ValidationError : Error {
    using Error::Error;
};

// Operands with incompatible mode counts or sectors.
struct DimensionError : Error {
    using Error::Error;
};

// Iterative solver failed to reach its tolerance.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual(residual) {}
    double residual;
};

}  // namespace fluidfrag
