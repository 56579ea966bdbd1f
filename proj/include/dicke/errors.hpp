#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dicke {

/// Raised when inputs violate a physical or schema invariant. Carries every
/// problem found, not just the first.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Raised when a numerical procedure cannot reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Phonon population reached the Fock cutoff.
class TruncationError : public NumericalError {
public:
    TruncationError(const std::string& what, double boundary_weight)
        : NumericalError(what), boundary_weight_(boundary_weight) {}
    double boundary_weight() const noexcept { return boundary_weight_; }

private:
    double boundary_weight_;
};

using WarningHandler = std::function<void(std::string_view)>;

// Warnings go to stderr unless a handler is installed. Returns the previous handler.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

} // namespace dicke
