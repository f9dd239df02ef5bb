#pragma once

namespace somfrechet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `somfrechet` tool. Subcommands: simulate, train, dist,
/// infer, rank, overlap, report. Every subcommand works inside one study
/// directory (`--dir`) and records its resolved settings there.
int run(int argc, const char* const* argv);

}  // namespace somfrechet::cli
