#pragma once

#include <iosfwd>

namespace t3dp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDivergence = 3;

/// Entry point of the `t3dp` tool. Artifacts and JSON reports go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace t3dp::cli
