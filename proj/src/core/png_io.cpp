#include "webrl/core/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace webrl::core {

namespace {

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) {
    png_error(png, "png: truncated stream");
    return;
  }
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void mem_write(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void mem_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> png_encode(const Image& img) {
  if (img.empty() || img.rgb.size() != std::size_t(img.width) * img.height * 3)
    throw PngError("png_encode: inconsistent image buffer");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw PngError("png_encode: init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw PngError("png_encode: info init failed");
  }

  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw PngError("png_encode: libpng failure");
  }
  png_set_write_fn(png, &out, mem_write, mem_flush);
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.px(0, y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Image png_decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw PngError("png_decode: not a PNG stream");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw PngError("png_decode: init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw PngError("png_decode: info init failed");
  }

  ReadCursor cur{bytes.data(), bytes.size(), 0};
  Image img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw PngError("png_decode: libpng failure");
  }
  png_set_read_fn(png, &cur, mem_read);
  png_read_info(png, info);

  // Normalize whatever the encoder produced down to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  img.width = int(png_get_image_width(png, info));
  img.height = int(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != std::size_t(img.width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw PngError("png_decode: unexpected row layout");
  }
  img.rgb.resize(std::size_t(img.width) * img.height * 3);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.px(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void png_write_file(const Image& img, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = png_encode(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PngError("png_write_file: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw PngError("png_write_file: short write to " + path.string());
}

Image png_read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PngError("png_read_file: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return png_decode(bytes);
}

}  // namespace webrl::core
