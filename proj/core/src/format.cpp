#include "diffatd/format.hpp"

#include <charconv>

namespace diffatd {

std::string fmt_real(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace diffatd
