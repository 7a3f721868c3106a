#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "webrl/core/error.hpp"
#include "webrl/core/image.hpp"

namespace webrl::core {

class PngError : public Error {
 public:
  using Error::Error;
};

std::vector<std::uint8_t> png_encode(const Image& img);
Image png_decode(std::span<const std::uint8_t> bytes);

void png_write_file(const Image& img, const std::filesystem::path& path);
Image png_read_file(const std::filesystem::path& path);

}  // namespace webrl::core
