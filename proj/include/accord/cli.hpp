/**
 * @file cli.hpp
 * @brief Command-line front end: curate, harmonize, arrange, stats, serve.
 *
 * Exit codes: 0 success, 1 usage, 2 data or validation, 3 I/O.
 *
 * Default paths come from, in order: flags, the --config JSON file
 * ({"library", "textures", "micro_table", "alpha", "beta", "tempo_bpm"}),
 * ACCORD_LIBRARY / ACCORD_TEXTURES, then the bundled data directory.
 */
#pragma once

#include <iosfwd>

namespace accord::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitIo = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace accord::cli
