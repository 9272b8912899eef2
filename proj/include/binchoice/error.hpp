#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace binchoice {

enum class ErrorCode {
    InvalidArgument,
    Range,
    DegenerateGrid,
    InsufficientGrid,
    Extrapolation,
    NotRationalizable,
    SlopeDegenerate,
    Separation,
    NonConvergence,
    Inconsistency,
    Evaluation,
    Io,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets
/// callers (the CLI in particular) map failures onto exit statuses without
/// parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace binchoice
