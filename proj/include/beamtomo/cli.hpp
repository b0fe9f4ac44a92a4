#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beamtomo::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 1;
inline constexpr int kNonConvergence = 2;
inline constexpr int kInvariant = 3;

/// Runs one command line (program name excluded), writing results and the
/// report to `out` and diagnostics to `err`. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace beamtomo::cli
