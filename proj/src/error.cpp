#include "flutesim/error.hpp"

namespace flutesim {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::PolyphonyError: return "PolyphonyError";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::InfeasibleTiming: return "InfeasibleTiming";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NoteTooShort: return "NoteTooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Error";
}

} // namespace flutesim
