#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sthl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `sthl` invocation. `args` excludes the program name. Human output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sthl::cli
