#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <system_error>

namespace reprel {

// Shortest round-trip decimal form, locale-independent.
inline std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("fmt_double failed");
  return std::string(buf, ptr);
}

// Fixed-point with `precision` digits, locale-independent (CSV columns).
inline std::string fmt_fixed(double v, int precision) {
  char buf[96];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  if (ec != std::errc()) throw std::runtime_error("fmt_fixed failed");
  return std::string(buf, ptr);
}

}  // namespace reprel
