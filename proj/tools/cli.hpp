#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fvl::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kFormat = 2;
inline constexpr int kNumeric = 3;

// Runs one `fvl` invocation. args[0] is the program name. Reports go to
// `out`, diagnostics to `err`; no exception escapes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fvl::cli
