#include "steerkit/error.hpp"

namespace steerkit {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::SeqTooLong: return "SeqTooLong";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyQuerySet: return "EmptyQuerySet";
        case ErrorCode::InvalidPromptPair: return "InvalidPromptPair";
        case ErrorCode::QueryTooLong: return "QueryTooLong";
        case ErrorCode::DegenerateSet: return "DegenerateSet";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorCode::NegativeAlpha: return "NegativeAlpha";
        case ErrorCode::InvalidRange: return "InvalidRange";
        case ErrorCode::NoValidAnswers: return "NoValidAnswers";
        case ErrorCode::ScorerFailure: return "ScorerFailure";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace steerkit
