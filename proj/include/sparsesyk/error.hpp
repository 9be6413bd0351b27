// error.hpp: exception taxonomy shared by the library and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace ssyk {

// Exit codes used by the command-line driver. Every exception type below maps
// onto exactly one of them.
enum class ExitCode : int {
    Success = 0,
    Validation = 2,
    Capacity = 3,
    Numerical = 4,
    NonConvergence = 5,
    Io = 6,
};

// Violated precondition (bad index, bad parameter, mismatched shapes).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Request exceeds a configured size cap (e.g. too many fermionic sites).
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

// Decomposition failure, singular matrix, grid too coarse for the requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed-point iteration did not reach tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_residual, bool oscillating)
        : std::runtime_error(what), best_residual_(best_residual), oscillating_(oscillating) {}

    double best_residual() const noexcept { return best_residual_; }
    // True when the residual history looked like an undamped oscillation; a
    // smaller mixing parameter usually helps.
    bool oscillating() const noexcept { return oscillating_; }

private:
    double best_residual_;
    bool oscillating_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Translate an in-flight exception into the CLI exit code taxonomy.
inline ExitCode exit_code_for(const std::exception& e) noexcept
{
    if (dynamic_cast<const DomainError*>(&e)) return ExitCode::Validation;
    if (dynamic_cast<const CapacityError*>(&e)) return ExitCode::Capacity;
    if (dynamic_cast<const ConvergenceError*>(&e)) return ExitCode::NonConvergence;
    if (dynamic_cast<const NumericalError*>(&e)) return ExitCode::Numerical;
    if (dynamic_cast<const IoError*>(&e)) return ExitCode::Io;
    return ExitCode::Numerical;
}

} // namespace ssyk
