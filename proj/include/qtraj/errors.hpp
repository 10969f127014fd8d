#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    kOk = 0,
    kValidation = 2,
    kNumerical = 3,
    kIo = 4,
};

class Error : public std::runtime_error {
 public:
    Error(ExitCode code, std::string kind, const std::string& message)
        : std::runtime_error(message), code_(code), kind_(std::move(kind)) {}

    ExitCode code() const noexcept { return code_; }
    // Short machine-readable category, e.g. "dimension_mismatch".
    const std::string& kind() const noexcept { return kind_; }

 private:
    ExitCode code_;
    std::string kind_;
};

// Malformed inputs or violated preconditions.
class ValidationError : public Error {
 public:
    ValidationError(std::string kind, const std::string& message)
        : Error(ExitCode::kValidation, std::move(kind), message) {}
};

// Numerical breakdown: blow-up, singular systems, spectral failures.
class NumericalError : public Error {
 public:
    NumericalError(std::string kind, const std::string& message)
        : Error(ExitCode::kNumerical, std::move(kind), message) {}
};

class IoError : public Error {
 public:
    explicit IoError(const std::string& message) : Error(ExitCode::kIo, "io", message) {}
};

}  // namespace qtraj
