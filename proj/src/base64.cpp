#include "posterkit/base64.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>

namespace posterkit {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<std::int8_t, 256> decode_table() {
  std::array<std::int8_t, 256> t{};
  t.fill(-1);
  for (int i = 0; i < 64; ++i) t[std::size_t(kAlphabet[i])] = std::int8_t(i);
  return t;
}

}  // namespace

std::string base64_encode(std::string_view data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= data.size()) {
    const std::uint32_t v = std::uint32_t(std::uint8_t(data[i])) << 16 |
                            std::uint32_t(std::uint8_t(data[i + 1])) << 8 |
                            std::uint32_t(std::uint8_t(data[i + 2]));
    out += kAlphabet[v >> 18];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
    i += 3;
  }
  const std::size_t rest = data.size() - i;
  if (rest == 1) {
    const std::uint32_t v = std::uint32_t(std::uint8_t(data[i])) << 16;
    out += kAlphabet[v >> 18];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = std::uint32_t(std::uint8_t(data[i])) << 16 |
                            std::uint32_t(std::uint8_t(data[i + 1])) << 8;
    out += kAlphabet[v >> 18];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view data) {
  static const auto table = decode_table();
  std::string out;
  out.reserve(data.size() / 4 * 3);
  std::uint32_t buf = 0;
  int bits = 0;
  for (char c : data) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const std::int8_t v = table[std::size_t(std::uint8_t(c))];
    if (v < 0) throw std::invalid_argument("invalid base64 input");
    buf = buf << 6 | std::uint32_t(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += char(std::uint8_t(buf >> bits));
    }
  }
  return out;
}

}  // namespace posterkit
