#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace webrl::core {

// 8-bit RGB raster, row-major, 3 bytes per pixel. Screenshots everywhere in
// the pipeline are this one representation.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  bool empty() const { return width <= 0 || height <= 0; }

  std::uint8_t* px(int x, int y) {
    return rgb.data() + 3 * (std::size_t(y) * std::size_t(width) + std::size_t(x));
  }
  const std::uint8_t* px(int x, int y) const {
    return rgb.data() + 3 * (std::size_t(y) * std::size_t(width) + std::size_t(x));
  }

  static Image filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(std::size_t(w) * std::size_t(h) * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
      img.rgb[i] = r;
      img.rgb[i + 1] = g;
      img.rgb[i + 2] = b;
    }
    return img;
  }

  bool operator==(const Image&) const = default;
};

}  // namespace webrl::core
