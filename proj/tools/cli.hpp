#pragma once

#include <string>
#include <vector>

namespace cbprior::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;

// Entry point shared by the binary and the in-process tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args);

}  // namespace cbprior::cli
