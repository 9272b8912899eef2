#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace binchoice::cli {

/// Exit codes returned by `run`.
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNegative = 2;

/// Runs one command line (without the program name). JSON reports go to
/// `out`; diagnostics and the optional human summary go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace binchoice::cli
