// SPDX-License-Identifier: Apache-2.0
/**
 * @file   cli.hpp
 * @brief  The `failseq` command-line front end.
 *
 * Subcommands: gen, train, tune, predict, extract, mine, eval, filter.
 * Global flags --seed, --threads and --quiet may appear before or after the
 * subcommand. FAILSEQ_SEED and FAILSEQ_THREADS supply defaults for the first
 * two; an explicit flag wins.
 *
 * Failures print exactly one line to `err`:
 *
 *   error kind=<usage|input|format|runtime> message="<text>"
 *
 * Usage errors additionally print the help text and return 2; all other
 * failures return 1.
 */
#ifndef FAILSEQ_CLI_HPP
#define FAILSEQ_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace failseq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace failseq::cli

#endif  // FAILSEQ_CLI_HPP
