#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srinit {

enum class ErrorCode {
    OrderTooHigh,
    NotEvaluable,
    AllZeroTargets,
    DegenerateTarget,
    TrialBudgetExceeded,
    TooFewExamples,
    ZeroNormInput,
    ShapeMismatch,
    NonFinite,
    BadMagic,
    TruncatedFile,
    CountMismatch,
    IncompatibleMetrics,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace srinit
