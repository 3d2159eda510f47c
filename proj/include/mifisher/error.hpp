#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mifisher {

enum class ErrorCode {
    NotHermitian,
    NoConvergence,
    DimMismatch,
    InvalidState,
    ThetaOutOfDomain,
    AnalyticUnavailable,
    UnknownName,
    NotTraceless,
    NotNormalized,
    SingularOutcome,
    MissingConditional,
    NotTracePreserving,
    NotUnitaryBlock,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::InvalidState: return "InvalidState";
        case ErrorCode::ThetaOutOfDomain: return "ThetaOutOfDomain";
        case ErrorCode::AnalyticUnavailable: return "AnalyticUnavailable";
        case ErrorCode::UnknownName: return "UnknownName";
        case ErrorCode::NotTraceless: return "NotTraceless";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::SingularOutcome: return "SingularOutcome";
        case ErrorCode::MissingConditional: return "MissingConditional";
        case ErrorCode::NotTracePreserving: return "NotTracePreserving";
        case ErrorCode::NotUnitaryBlock: return "NotUnitaryBlock";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace mifisher
