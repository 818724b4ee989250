#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace umrahguard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Entry point behind the `umrahguard` binary. `args` excludes the program
/// name; reports go to files under --out, progress and tables to `out`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace umrahguard::cli
