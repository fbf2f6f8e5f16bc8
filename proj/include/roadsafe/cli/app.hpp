#pragma once

#include <iosfwd>

namespace roadsafe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2; ///< events lost, validation or lookup failure
inline constexpr int kExitIo = 3;

/// Entry point of the `roadsafe` tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace roadsafe::cli
