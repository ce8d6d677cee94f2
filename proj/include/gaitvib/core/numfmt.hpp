#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace gaitvib {

/// Shortest general-format text of x with `digits` significant digits.
inline std::string format_sig(double x, int digits) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
  return {buf, r.ptr};
}

/// Parses the whole of `s` as a double; throws std::invalid_argument otherwise.
inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

/// x rounded to `digits` significant decimal digits, so that printing with
/// that many digits and parsing back reproduces it exactly.
inline double quantize(double x, int digits = 9) { return parse_double(format_sig(x, digits)); }

}  // namespace gaitvib
