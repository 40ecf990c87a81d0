#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace namdkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitRejected = 2;

/// Environment variable naming the PDB download cache directory.
inline constexpr const char* kCacheEnv = "NAMDKIT_CACHE";

/// Runs the command line `args` (args[0] is the program name). Subcommands:
/// fetch, preflight, validate, gen-namd, analyze, report, pipeline.
/// Returns 0 on success, 1 on I/O or parse failure and 2 when validation
/// rejects the input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace namdkit::cli
