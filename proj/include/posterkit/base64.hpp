#pragma once

#include <string>
#include <string_view>

namespace posterkit {

std::string base64_encode(std::string_view data);
// Throws std::invalid_argument on non-base64 input.
std::string base64_decode(std::string_view data);

}  // namespace posterkit
