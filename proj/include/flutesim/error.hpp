#pragma once

#include <stdexcept>
#include <string>

namespace flutesim {

enum class ErrorCode {
    MalformedFile,
    UnsupportedFormat,
    PolyphonyError,
    RangeError,
    SyntaxError,
    InfeasibleTiming,
    DomainError,
    NoteTooShort,
    LengthMismatch,
    IoError,
    ConfigError,
};

const char* error_code_name(ErrorCode code);

/// All recoverable failures surface as Error; code() identifies the class
/// so callers and tests can dispatch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace flutesim
