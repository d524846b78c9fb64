#pragma once

#include <atomic>
#include <iosfwd>

namespace vsl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerifyFailed = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point behind the `vsl` binary. `stop`, when given, is polled by
/// long-running subcommands; bench flushes the records it has and exits.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* stop = nullptr);

}  // namespace vsl::cli
