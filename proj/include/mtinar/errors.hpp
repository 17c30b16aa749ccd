#pragma once

#include <stdexcept>
#include <string>

namespace mtinar {

/// Error categories, aligned with the CLI exit codes.
enum class ErrorKind : int {
    Input = 2,       // malformed data, bad arguments, violated preconditions
    Numeric = 3,     // singular designs, insufficient data, non-convergence
    Truncation = 4,  // state-space truncation too small for requested accuracy
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

struct InputError : Error {
    explicit InputError(const std::string& message) : Error(ErrorKind::Input, message) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& message) : Error(ErrorKind::Numeric, message) {}
};

struct TruncationError : Error {
    explicit TruncationError(const std::string& message) : Error(ErrorKind::Truncation, message) {}
};

}  // namespace mtinar
