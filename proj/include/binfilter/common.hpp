#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace binfilter {

using BinaryVector = std::vector<std::uint8_t>;

// Thrown for violated preconditions that are the caller's fault.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical routine cannot produce a result (e.g. an empty LP).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed 17-significant-digit text; round-trips every double.
inline std::string format_real(double v) {
  std::array<char, 40> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                           std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace binfilter
