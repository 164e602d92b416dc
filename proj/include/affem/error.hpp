#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affem {

enum class ErrorCode {
    CycleDetected,
    ShapeMismatch,
    NotNormalized,
    UnknownNode,
    InvalidSpec,
    EvidenceShapeMismatch,
    AllZeroLikelihood,
    InitializationError,
    SpecMismatch,
    ConfigError,
    IoError,
    ParseError,
    InvalidArgument,
    MonotonicityViolation,
};

std::string_view to_string(ErrorCode code);

/// Exception type thrown by every affem operation. The code identifies the
/// failure class so callers can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace affem
