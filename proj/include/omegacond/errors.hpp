#pragma once

#include <stdexcept>
#include <string>

namespace omegacond {

/// Category of a domain failure. CLI maps any of these to exit code 1.
enum class ErrorCode {
    NotPositiveDefinite,
    SingularMatrix,
    NonConvergence,
    NonPositiveEigenvalue,
    DegenerateColumn,
    FeasibilityViolation,
    OutsideDomain,
    ZeroColumn,
    RankDeficientBlock,
    DimensionMismatch,
    EmptyRunSet,
    InternalConsistency,
    ParseError,
    IoError,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
        case ErrorCode::DegenerateColumn: return "DegenerateColumn";
        case ErrorCode::FeasibilityViolation: return "FeasibilityViolation";
        case ErrorCode::OutsideDomain: return "OutsideDomain";
        case ErrorCode::ZeroColumn: return "ZeroColumn";
        case ErrorCode::RankDeficientBlock: return "RankDeficientBlock";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyRunSet: return "EmptyRunSet";
        case ErrorCode::InternalConsistency: return "InternalConsistency";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Domain error carrying a category plus a human-readable message.
/// Failing indices (pivot, column, ...) are reported through `index`.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, long index = -1)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          index_(index) {}

    ErrorCode code() const noexcept { return code_; }
    long index() const noexcept { return index_; }

private:
    ErrorCode code_;
    long index_;
};

} // namespace omegacond
