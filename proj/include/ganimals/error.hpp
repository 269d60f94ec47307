#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ganimals {

enum class ErrorCode {
    ParseError,
    ValidationError,
    UnknownCore,
    UnknownCategory,
    TruncationOutOfRange,
    SameCategory,
    WrongGeneration,
    IdenticalParents,
    InvalidMix,
    PreconditionViolation,
    EmptyLeaderboard,
    NotInWorld,
    UnknownGanimal,
    EmptyRecord,
    RatingOutOfRange,
    UnknownMetric,
    UnknownFeature,
    InsufficientData,
    BackendUnavailable,
    RenderRejected,
    CrossWorld,
    UnknownPredicate,
    BadRequest,
    ConfigError,
    AlreadyNamed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine carries one of the codes above so the
/// service layer can map it onto an HTTP status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace ganimals
