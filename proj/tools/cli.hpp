#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metabo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Environment variable overriding the output root ("out" by default).
inline constexpr const char* kOutputRootEnv = "METABO_OUT";

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metabo::cli
