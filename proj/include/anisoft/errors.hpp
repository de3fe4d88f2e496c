#pragma once

#include <stdexcept>
#include <string>

namespace anisoft {

/// Invalid numerical input: non-finite values, weights below one, t <= 0.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A discretization that cannot support the requested construction
/// (grid too coarse, kernel under-resolved).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller-side misuse: mismatched grids, out-of-range level or axis.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition of an evaluator or experiment is violated.
/// The message names the violated condition; the CLI maps this to exit code 2.
class PreconditionError : public std::runtime_error {
public:
    PreconditionError(std::string condition, const std::string& detail)
        : std::runtime_error(condition + ": " + detail), condition_(std::move(condition)) {}

    const std::string& condition() const noexcept { return condition_; }

private:
    std::string condition_;
};

}  // namespace anisoft
