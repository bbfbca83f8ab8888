#pragma once

#include <iosfwd>

namespace diffatd {

/// Entry point of the `diffatd` tool. Progress and errors go to `err`.
/// Returns 0 on success, 1 for invalid input or configuration, 2 for
/// failures while running.
int run_cli(int argc, const char* const* argv, std::ostream& err);

}  // namespace diffatd
