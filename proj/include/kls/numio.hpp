// Shortest round-trip decimal text for doubles (NaN and Inf included), used by
// every JSON file the library writes so that values survive bit-exactly.
#pragma once

#include <string>

namespace kls {

std::string format_double(double x);
// Accepts the output of format_double; throws Schema on malformed text.
double parse_double(const std::string& s);

}  // namespace kls
