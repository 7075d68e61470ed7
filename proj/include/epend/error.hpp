#pragma once

#include <stdexcept>
#include <string>

namespace epend {

enum class ErrorKind {
    invalid_argument,
    invalid_state,
    blow_up,
    newton_diverged,
    near_bifurcation,
    no_vertical_harmonic,
    invalid_bracket,
};

/// Single exception type for the library; `kind()` lets callers branch
/// without string matching. `value()` carries the failure time for blow-ups
/// and the last residual for Newton failures.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, double value = 0.0)
        : std::runtime_error(what), kind_(kind), value_(value)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    double value() const noexcept { return value_; }

private:
    ErrorKind kind_;
    double value_;
};

}  // namespace epend
