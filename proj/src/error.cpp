#include "srinit/error.hpp"

namespace srinit {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OrderTooHigh: return "OrderTooHigh";
        case ErrorCode::NotEvaluable: return "NotEvaluable";
        case ErrorCode::AllZeroTargets: return "AllZeroTargets";
        case ErrorCode::DegenerateTarget: return "DegenerateTarget";
        case ErrorCode::TrialBudgetExceeded: return "TrialBudgetExceeded";
        case ErrorCode::TooFewExamples: return "TooFewExamples";
        case ErrorCode::ZeroNormInput: return "ZeroNormInput";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::IncompatibleMetrics: return "IncompatibleMetrics";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace srinit
