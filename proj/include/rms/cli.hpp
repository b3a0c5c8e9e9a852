#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rms::cli {

inline constexpr const char* kToolName = "rms";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kGuardExceeded = 3,
    kNumericFailure = 4,
};

/// Runs one command line (args excludes the program name). JSON results go to
/// --output when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rms::cli
