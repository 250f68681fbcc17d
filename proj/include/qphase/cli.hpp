// cli.hpp: command-line front end.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qphase::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command. `args` excludes the program name; records go to `out`
/// (or to --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qphase::cli
