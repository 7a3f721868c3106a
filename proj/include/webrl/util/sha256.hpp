#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace webrl::util {

// SHA-256 digest as lowercase hex. Self-contained so the store's
// content-addressed files do not pull in a crypto library.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(const std::string& data);

}  // namespace webrl::util
