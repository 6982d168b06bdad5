#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ringsig {

enum class ErrorCode {
    LengthNotDivisible,
    IndexOutOfRange,
    LengthMismatch,
    DegenerateFactor,
    DomainError,
    PayloadTooLarge,
    EmptyMessage,
    EmptyInput,
    TooFewSamples,
    NotPsk,
    NoFrame,
    MissingClass,
    ModelMissing,
    ConfigError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::LengthNotDivisible: return "LengthNotDivisible";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateFactor: return "DegenerateFactor";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::EmptyMessage: return "EmptyMessage";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NotPsk: return "NotPsk";
    case ErrorCode::NoFrame: return "NoFrame";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::ModelMissing: return "ModelMissing";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the Python bindings) can branch without parsing messages.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ringsig
