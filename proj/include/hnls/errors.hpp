#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hnls {

// Caller broke a precondition (grid mismatch, bad argument order, ...).
class UsageError : public std::invalid_argument {
public:
    explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A parameter left its mathematically admissible range.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// An iterative solver did not reach its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, std::vector<double> residual_history = {})
        : std::runtime_error(msg), residuals(std::move(residual_history)) {}
    std::vector<double> residuals;
};

// A field can no longer be represented on the requested grid.
class ResolutionError : public std::runtime_error {
public:
    explicit ResolutionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hnls
