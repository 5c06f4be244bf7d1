// errors.hpp — error kinds shared by every module, one exception type

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qthermo {

enum class ErrorKind {
    NonHermitianInput,
    NonFinite,
    BadDimension,
    NegativeFrequency,
    NonPositiveInput,
    PositivityViolation,
    NoConvergence,
    StepTooLarge,
    PureStateSingularity,
    SingularOutcome,
    ZeroVariance,
    ParseError,
    ValidationError,
    InvariantViolation,
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonHermitianInput:    return "NonHermitianInput";
        case ErrorKind::NonFinite:            return "NonFinite";
        case ErrorKind::BadDimension:         return "BadDimension";
        case ErrorKind::NegativeFrequency:    return "NegativeFrequency";
        case ErrorKind::NonPositiveInput:     return "NonPositiveInput";
        case ErrorKind::PositivityViolation:  return "PositivityViolation";
        case ErrorKind::NoConvergence:        return "NoConvergence";
        case ErrorKind::StepTooLarge:         return "StepTooLarge";
        case ErrorKind::PureStateSingularity: return "PureStateSingularity";
        case ErrorKind::SingularOutcome:      return "SingularOutcome";
        case ErrorKind::ZeroVariance:         return "ZeroVariance";
        case ErrorKind::ParseError:           return "ParseError";
        case ErrorKind::ValidationError:      return "ValidationError";
        case ErrorKind::InvariantViolation:   return "InvariantViolation";
    }
    return "Unknown";
}

// Process exit code for each kind; 0 and 1 are reserved for success / unexpected failure.
inline int exit_code(ErrorKind kind) noexcept { return 10 + static_cast<int>(kind); }

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qthermo
