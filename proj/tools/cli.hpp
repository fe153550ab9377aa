#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gwsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `gwsim` tool. `args` excludes the program name.
/// Returns 0 on success, 2 on usage or configuration errors, 1 otherwise.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gwsim::cli
