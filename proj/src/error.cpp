#include "ganimals/error.hpp"

namespace ganimals {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownCore: return "UnknownCore";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::TruncationOutOfRange: return "TruncationOutOfRange";
    case ErrorCode::SameCategory: return "SameCategory";
    case ErrorCode::WrongGeneration: return "WrongGeneration";
    case ErrorCode::IdenticalParents: return "IdenticalParents";
    case ErrorCode::InvalidMix: return "InvalidMix";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::EmptyLeaderboard: return "EmptyLeaderboard";
    case ErrorCode::NotInWorld: return "NotInWorld";
    case ErrorCode::UnknownGanimal: return "UnknownGanimal";
    case ErrorCode::EmptyRecord: return "EmptyRecord";
    case ErrorCode::RatingOutOfRange: return "RatingOutOfRange";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::RenderRejected: return "RenderRejected";
    case ErrorCode::CrossWorld: return "CrossWorld";
    case ErrorCode::UnknownPredicate: return "UnknownPredicate";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::AlreadyNamed: return "AlreadyNamed";
    }
    return "Unknown";
}

} // namespace ganimals
