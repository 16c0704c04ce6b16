#pragma once

#include <stdexcept>
#include <string>

namespace shocknozzle {

// Exit-code contract used by the CLI: 0 success, 2 validation error,
// 3 solver divergence/internal failure, 4 I/O error.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs: violated preconditions, malformed configs, incompatible data.
struct ValidationError : Error {
    using Error::Error;
};

// Math-domain precondition violations (non-positive density, subsonic inlet, ...).
struct DomainError : ValidationError {
    using ValidationError::ValidationError;
};

// The requested exit pressure admits no transonic shock in the nozzle.
struct WindowError : ValidationError {
    using ValidationError::ValidationError;
};

// Internal solver failures: singular systems, bracketing failures, sonic guard trips.
struct SolverError : Error {
    using Error::Error;
};

struct SonicDegeneracyError : SolverError {
    using SolverError::SolverError;
};

// Fixed-point iteration failed to contract within the iteration budget.
struct DivergenceError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace shocknozzle
