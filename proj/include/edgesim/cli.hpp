#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edgesim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNonCompliant = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable consulted when --out is not given.
inline constexpr const char* kOutDirEnv = "EDGESIM_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "edgesim_out";

/// Runs one invocation. `args` excludes the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edgesim::cli
