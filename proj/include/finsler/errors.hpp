#pragma once

// Error taxonomy shared across the library. Every throwing path uses one of
// these so callers (and the check runner) can distinguish bad input from a
// genuine structural failure of the geometry under test.

#include <stdexcept>
#include <string>

namespace finsler {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested derivative order exceeds the compiled jet budget.
struct OrderError : Error {
    explicit OrderError(const std::string& msg) : Error(msg) {}
};

// Evaluation left the admissible domain (slit violation, sqrt/log of a
// non-positive value, division by a vanishing leading coefficient).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Text that does not parse; `offset` is the byte position of the failure.
struct ParseError : Error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t off)
        : Error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

// A defining axiom of the object under construction failed (e.g. the
// fundamental tensor is not positive definite). Carries the witness value.
struct StructureError : Error {
    double witness;
    StructureError(const std::string& msg, double w) : Error(msg), witness(w) {}
};

// Bad run configuration (unknown metric, even dimension, unknown check...).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace finsler
