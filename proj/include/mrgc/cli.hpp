#pragma once

#include <string>
#include <vector>

namespace mrgc::cli {

inline constexpr const char* tool_version = "0.1.0";

/// Exit status: 0 success, 1 usage error, 2 data or invariant error.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace mrgc::cli
