#pragma once

#include <string>

namespace diffatd {

/// Shortest decimal text that parses back to exactly `value`.
std::string fmt_real(double value);

}  // namespace diffatd
