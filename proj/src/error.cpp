#include "affem/error.hpp"

namespace affem {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EvidenceShapeMismatch: return "EvidenceShapeMismatch";
        case ErrorCode::AllZeroLikelihood: return "AllZeroLikelihood";
        case ErrorCode::InitializationError: return "InitializationError";
        case ErrorCode::SpecMismatch: return "SpecMismatch";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    }
    return "Unknown";
}

}  // namespace affem
