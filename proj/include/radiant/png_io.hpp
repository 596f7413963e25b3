#pragma once

#include <png.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "radiant/camera.hpp"
#include "radiant/errors.hpp"

namespace radiant {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] inline void png_fail(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

inline void png_warn(png_structp, png_const_charp) {}

// Objects touched after setjmp live in the caller's frame, so a longjmp never
// leaves locals of this frame in an indeterminate state.
inline bool read_png16_into(std::FILE* file, std::string* message, Image<std::uint16_t>* image,
                            std::vector<png_byte>* row, bool* bad_format) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, message, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    *message = "libpng initialisation failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
    *bad_format = true;
  } else {
    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    png_set_swap(png);  // PNG stores 16-bit samples big-endian
    png_read_update_info(png, info);
    *image = Image<std::uint16_t>(static_cast<int>(w), static_cast<int>(h));
    row->resize(png_get_rowbytes(png, info));
    for (png_uint_32 y = 0; y < h; ++y) {
      png_read_row(png, row->data(), nullptr);
      std::memcpy(&image->pixels[static_cast<std::size_t>(y) * w], row->data(), static_cast<std::size_t>(w) * 2);
    }
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace detail

/// Reads a single-channel 16-bit PNG.
inline Image<std::uint16_t> read_png16(const std::filesystem::path& path) {
  detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string message;
  Image<std::uint16_t> image;
  std::vector<png_byte> row;
  bool bad_format = false;
  if (!detail::read_png16_into(file.get(), &message, &image, &row, &bad_format)) {
    throw Error(ErrorKind::Io, "'" + path.string() + "': " + message);
  }
  if (bad_format) throw Error(ErrorKind::InvalidArgument, "'" + path.string() + "' is not a 16-bit grayscale PNG");
  return image;
}

namespace detail {

inline bool write_png_from(std::FILE* file, std::string* message, int width, int height, int bit_depth,
                           int color_type, int channels, const std::uint8_t* data, bool swap16) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, message, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    *message = "libpng initialisation failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (swap16) png_set_swap(png);
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

inline void write_png(const std::filesystem::path& path, int width, int height, int bit_depth, int color_type,
                      int channels, const std::uint8_t* data, bool swap16) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  std::string message;
  if (!write_png_from(file.get(), &message, width, height, bit_depth, color_type, channels, data, swap16)) {
    throw Error(ErrorKind::Io, "'" + path.string() + "': " + message);
  }
  if (std::fflush(file.get()) != 0) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace detail

inline void write_png16(const std::filesystem::path& path, const Image<std::uint16_t>& image) {
  detail::write_png(path, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, 1,
                    reinterpret_cast<const std::uint8_t*>(image.pixels.data()), true);
}

/// 8-bit RGB, `rgb` holds width * height * 3 bytes.
inline void write_png_rgb(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
  detail::write_png(path, width, height, 8, PNG_COLOR_TYPE_RGB, 3, rgb.data(), false);
}

}  // namespace radiant
