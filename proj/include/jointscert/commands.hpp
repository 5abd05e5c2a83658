#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jointscert/io.hpp"

namespace jointscert {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kMathFailure = 1, kInputError = 2, kNonconvergence = 3 };

/// n^d grid {0..n-1}^d with every axis-parallel line through it, split into
/// one family per axis, and M = 1 on the grid.
InstanceFile grid_instance(std::size_t n, std::size_t d, std::uint64_t p);
/// `count` lines, each a uniform point plus a uniform nonzero direction.
InstanceFile random_lines_instance(std::uint64_t seed, std::size_t count, std::size_t d,
                                   std::uint64_t p);
/// `count` uniform nonzero directions with integer weights in [1, 100].
InstanceFile random_weights_instance(std::uint64_t seed, std::size_t count, std::size_t d,
                                     std::uint64_t p);

/// Runs one command line (argv[0] is the program name). Reports, instances
/// and diagnostics go to `out` and `err` unless --out names a file.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace jointscert
