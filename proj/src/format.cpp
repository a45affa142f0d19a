#include "smrs/format.hpp"

#include <cstdio>

namespace smrs {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace smrs
