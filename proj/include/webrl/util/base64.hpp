#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace webrl::util {

std::string base64_encode(std::span<const std::uint8_t> data);

// Ignores ASCII whitespace; throws std::invalid_argument on other non-alphabet
// bytes or a truncated tail.
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace webrl::util
