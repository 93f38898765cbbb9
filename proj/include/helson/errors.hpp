#pragma once

#include <stdexcept>
#include <string>

namespace helson {

/// Raised when an argument violates an operation's domain (index out of the
/// sieve range, malformed fixture, support outside a window, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Raised when an iterative method hits its cap. Carries the best estimate
/// reached so callers can still report something.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

}  // namespace helson
