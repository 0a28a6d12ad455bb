#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace igafem {

/// Thrown when textual input (selector strings, expression strings, domain or
/// problem files) cannot be parsed.  `position` is the 0-based offset of the
/// offending character within the input that was being parsed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Thrown when a document is syntactically fine but semantically inconsistent
/// (unknown region reference, mismatched array sizes, bad field family, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a linear solve cannot produce a usable solution.  For the
/// iterative solver the residual history up to the failure is attached.
class SolveError : public std::runtime_error {
public:
    explicit SolveError(const std::string& message, std::vector<double> residuals = {})
        : std::runtime_error(message), residuals_(std::move(residuals)) {}

    const std::vector<double>& residual_history() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// Non-fatal diagnostics (e.g. conflicting boundary values at a shared patch
/// corner) are routed through here.  Defaults to writing on stderr; tests
/// install their own handler to assert on the messages.
void warn(const std::string& message);
void set_warning_handler(std::function<void(const std::string&)> handler);

}  // namespace igafem
