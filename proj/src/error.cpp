#include "binchoice/error.hpp"

namespace binchoice {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::Range: return "range-error";
        case ErrorCode::DegenerateGrid: return "degenerate-grid";
        case ErrorCode::InsufficientGrid: return "insufficient-grid";
        case ErrorCode::Extrapolation: return "extrapolation";
        case ErrorCode::NotRationalizable: return "not-rationalizable";
        case ErrorCode::SlopeDegenerate: return "slope-degenerate";
        case ErrorCode::Separation: return "separation";
        case ErrorCode::NonConvergence: return "non-convergence";
        case ErrorCode::Inconsistency: return "inconsistency";
        case ErrorCode::Evaluation: return "evaluation-failure";
        case ErrorCode::Io: return "io-error";
    }
    return "unknown";
}

}  // namespace binchoice
