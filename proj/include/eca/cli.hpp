#pragma once

#include <iosfwd>

namespace eca {

inline constexpr const char* kVersion = "0.1.0";

/// Subcommands: generate, fit, eval, sweep, moments. Returns 0 on success,
/// 2 on usage errors and 1 on data errors (reported as one JSON line on err).
int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace eca
