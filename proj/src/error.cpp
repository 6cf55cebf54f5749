#include "grassdisagg/error.hpp"

namespace grassdisagg {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingPeriod: return "MissingPeriod";
        case ErrorCode::NonNumeric: return "NonNumeric";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::ImMismatch: return "ImMismatch";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DuplicateRecord: return "DuplicateRecord";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::LengthError: return "LengthError";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::TooFewSites: return "TooFewSites";
        case ErrorCode::WidthMismatch: return "WidthMismatch";
        case ErrorCode::ShapeError: return "ShapeError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::MissingCumulative: return "MissingCumulative";
        case ErrorCode::MissingGrowth: return "MissingGrowth";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ModelFormat: return "ModelFormat";
        case ErrorCode::PredictionNonFinite: return "PredictionNonFinite";
        case ErrorCode::ZeroSumScale: return "ZeroSumScale";
        case ErrorCode::NoConvergence: return "NoConvergence";
    }
    return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
    return code == ErrorCode::PredictionNonFinite || code == ErrorCode::ZeroSumScale ||
           code == ErrorCode::NoConvergence;
}

}  // namespace grassdisagg
