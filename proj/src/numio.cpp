#include "kls/numio.hpp"

#include <charconv>
#include <system_error>

#include "kls/errors.hpp"

namespace kls {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw Error(ErrorKind::Schema, "malformed number '" + s + "'");
  return v;
}

}  // namespace kls
