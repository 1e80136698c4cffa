#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qunravel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "x.json" -> "x<suffix>"; other names get the suffix appended.
std::string sidecar_path(const std::string& path, const std::string& ext, const std::string& suffix);

}  // namespace qunravel::cli
