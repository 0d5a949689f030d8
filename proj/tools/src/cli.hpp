#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resample_lab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

// Runs one command line (without the program name). Results go to `out` when
// no --output is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resample_lab::cli
