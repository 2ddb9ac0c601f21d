// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver. Exit codes: 0 ok, 1 usage or invalid configuration,
// 2 invariant violation, 3 I/O failure.
#pragma once

#include <ostream>

namespace cascade::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitIo = 3;

/// Parses argv, runs the selected command and writes its artifact to the
/// --output file (or `out`). The one-line summary goes to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cascade::cli
