#pragma once

#include <stdexcept>
#include <string>

namespace sgrl {

// Thrown when a Cholesky factorization fails even after jitter escalation.
// Carries the size of the offending matrix and the last jitter tried so the
// caller can report something actionable instead of a bare "LLT failed".
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(std::size_t n, double last_jitter, const std::string& what)
        : std::runtime_error(what), n_(n), last_jitter_(last_jitter) {}

    std::size_t matrix_size() const noexcept { return n_; }
    double last_jitter() const noexcept { return last_jitter_; }

private:
    std::size_t n_;
    double last_jitter_;
};

// Configuration or input that cannot be interpreted (bad JSON, bad flag
// value, malformed checkpoint).  Distinct from invalid_argument so the CLI
// can map it to its "usage" exit code.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sgrl
