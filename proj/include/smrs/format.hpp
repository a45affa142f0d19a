#pragma once

#include <string>

namespace smrs {

/// Shortest text that round-trips, capped at 17 significant digits.
std::string format_number(double v);

}  // namespace smrs
