#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grassdisagg {

enum class ErrorCode {
    // data / validation
    MissingPeriod,
    NonNumeric,
    InvariantViolation,
    ImMismatch,
    SchemaError,
    DuplicateRecord,
    DomainError,
    LengthError,
    EmptySeries,
    EmptyDataset,
    TooFewSites,
    WidthMismatch,
    ShapeError,
    ConfigError,
    MissingCumulative,
    MissingGrowth,
    DegenerateInput,
    IoError,
    ModelFormat,
    // numerical
    PredictionNonFinite,
    ZeroSumScale,
    NoConvergence,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for codes that stem from numerical failure rather than bad input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace grassdisagg
