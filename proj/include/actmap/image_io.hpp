#pragma once

// 8-bit PNG/BMP decoding into [0, 1] RGB tensors and deterministic PNG output.

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <png.h>

#include "actmap/error.hpp"
#include "actmap/tensor.hpp"

namespace actmap {

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel
};

inline Tensor to_tensor(const RgbImage& img) {
  Tensor t(img.width, img.height, 3);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        t(x, y, c) = static_cast<float>(img.pixels[(y * img.width + x) * 3 + c]) / 255.0f;
      }
    }
  }
  return t;
}

namespace detail {

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

inline RgbImage read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(ErrorKind::MissingFile, "cannot open " + path.string());

  PngReadGuard guard;
  guard.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!guard.png) fail(ErrorKind::IoError, "png_create_read_struct failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) fail(ErrorKind::IoError, "png_create_info_struct failed");

  RgbImage img;
  std::vector<png_bytep> rows;
  bool unsupported = false;
  if (setjmp(png_jmpbuf(guard.png))) {
    fail(ErrorKind::CorruptFile, "libpng failed to decode " + path.string());
  }
  png_init_io(guard.png, file.get());
  png_read_info(guard.png, guard.info);
  const int bit_depth = png_get_bit_depth(guard.png, guard.info);
  const int color = png_get_color_type(guard.png, guard.info);
  if (bit_depth > 8) {
    unsupported = true;
  } else {
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(guard.png);
    if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(guard.png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(guard.png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(guard.png);
    png_read_update_info(guard.png, guard.info);
    img.width = png_get_image_width(guard.png, guard.info);
    img.height = png_get_image_height(guard.png, guard.info);
    if (png_get_rowbytes(guard.png, guard.info) != img.width * 3) {
      fail(ErrorKind::UnsupportedFormat, path.string() + ": unexpected PNG row layout");
    }
    img.pixels.resize(img.width * img.height * 3);
    rows.resize(img.height);
    for (std::size_t y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + y * img.width * 3;
    png_read_image(guard.png, rows.data());
    png_read_end(guard.png, nullptr);
  }
  if (unsupported) {
    fail(ErrorKind::UnsupportedFormat, path.string() + ": only 8-bit PNG is supported");
  }
  return img;
}

inline std::uint32_t le32(const std::vector<unsigned char>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

/// Uncompressed BMP: 24/32-bit BGR(A) or 8-bit palettized.
inline RgbImage read_bmp(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 54) fail(ErrorKind::CorruptFile, path.string() + ": truncated BMP header");
  const std::uint32_t offset = le32(bytes, 10);
  const std::uint32_t header_size = le32(bytes, 14);
  const auto width = static_cast<std::int32_t>(le32(bytes, 18));
  const auto height = static_cast<std::int32_t>(le32(bytes, 22));
  const int bpp = bytes[28] | (bytes[29] << 8);
  const std::uint32_t compression = le32(bytes, 30);
  if (compression != 0 && !(compression == 3 && bpp == 32)) {
    fail(ErrorKind::UnsupportedFormat, path.string() + ": compressed BMP");
  }
  if (bpp != 24 && bpp != 32 && bpp != 8) {
    fail(ErrorKind::UnsupportedFormat, path.string() + ": BMP bit depth " + std::to_string(bpp));
  }
  if (width <= 0 || height == 0) fail(ErrorKind::CorruptFile, path.string() + ": bad BMP dimensions");
  const bool bottom_up = height > 0;
  RgbImage img;
  img.width = static_cast<std::size_t>(width);
  img.height = static_cast<std::size_t>(bottom_up ? height : -height);
  const std::size_t stride = ((img.width * static_cast<std::size_t>(bpp) + 31) / 32) * 4;
  if (offset + stride * img.height > bytes.size()) fail(ErrorKind::CorruptFile, path.string() + ": truncated BMP");
  std::vector<std::uint8_t> palette;
  if (bpp == 8) {
    const std::size_t pal_at = 14 + header_size;
    std::uint32_t colors = le32(bytes, 46);
    if (colors == 0) colors = 256;
    if (pal_at + colors * 4 > offset) fail(ErrorKind::CorruptFile, path.string() + ": bad BMP palette");
    palette.assign(bytes.begin() + static_cast<long>(pal_at), bytes.begin() + static_cast<long>(pal_at + colors * 4));
  }
  img.pixels.resize(img.width * img.height * 3);
  for (std::size_t y = 0; y < img.height; ++y) {
    const std::size_t src_row = bottom_up ? img.height - 1 - y : y;
    const unsigned char* row = bytes.data() + offset + src_row * stride;
    for (std::size_t x = 0; x < img.width; ++x) {
      std::uint8_t* dst = img.pixels.data() + (y * img.width + x) * 3;
      if (bpp == 8) {
        const std::size_t idx = row[x] * 4u;
        if (idx + 3 > palette.size()) fail(ErrorKind::CorruptFile, path.string() + ": palette index out of range");
        dst[0] = palette[idx + 2];
        dst[1] = palette[idx + 1];
        dst[2] = palette[idx];
      } else {
        const unsigned char* px = row + x * static_cast<std::size_t>(bpp / 8);
        dst[0] = px[2];
        dst[1] = px[1];
        dst[2] = px[0];
      }
    }
  }
  return img;
}

}  // namespace detail

inline RgbImage read_rgb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "cannot open " + path.string());
  unsigned char magic[8] = {};
  in.read(reinterpret_cast<char*>(magic), 8);
  if (in.gcount() >= 8 && png_sig_cmp(magic, 0, 8) == 0) {
    in.close();
    return detail::read_png(path);
  }
  if (in.gcount() >= 2 && magic[0] == 'B' && magic[1] == 'M') {
    in.seekg(0);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return detail::read_bmp(path, bytes);
  }
  fail(ErrorKind::UnsupportedFormat, path.string() + ": not a PNG or BMP file");
}

/// Decodes a PNG or BMP file into a W x H x 3 tensor with values x / 255.
inline Tensor decode_image(const std::filesystem::path& path) { return to_tensor(read_rgb(path)); }

namespace detail {
struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};
}  // namespace detail

/// Writes 8-bit RGB (channels == 3) or grayscale (channels == 1) PNG with
/// fixed compression settings and no timestamp, so output is reproducible.
inline void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height,
                      std::span<const std::uint8_t> pixels, int channels = 3) {
  if (pixels.size() != width * height * static_cast<std::size_t>(channels)) {
    fail(ErrorKind::ShapeMismatch, "write_png pixel buffer size mismatch");
  }
  std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(ErrorKind::IoError, "cannot write " + path.string());
  detail::PngWriteGuard guard;
  guard.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!guard.png) fail(ErrorKind::IoError, "png_create_write_struct failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) fail(ErrorKind::IoError, "png_create_info_struct failed");
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(guard.png))) fail(ErrorKind::IoError, "libpng failed writing " + path.string());
  png_init_io(guard.png, file.get());
  png_set_compression_level(guard.png, 6);
  png_set_IHDR(guard.png, guard.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(guard.png, guard.info);
  for (std::size_t y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels.data() + y * width * static_cast<std::size_t>(channels));
  }
  png_write_image(guard.png, rows.data());
  png_write_end(guard.png, nullptr);
}

}  // namespace actmap
