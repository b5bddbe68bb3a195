#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "crisislens/error.hpp"

namespace crisislens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

int exit_code(ErrorKind kind);

/// Subcommands gen | train | eval | predict | curve | gradcheck | compare.
/// `args` excludes the program name. `in`/`out` carry the predict stream and
/// reports; diagnostics and usage go to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace crisislens::cli
