#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "morphlab/error.hpp"

namespace morphlab {

/// 8-bit image, row-major, channels interleaved. Channels is 1 or 3.
struct ImageBuffer {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> samples;

  ImageBuffer() = default;
  ImageBuffer(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), samples(w * h * c, fill) {
    validate();
  }
  ImageBuffer(std::size_t w, std::size_t h, std::size_t c, std::vector<std::uint8_t> s)
      : width(w), height(h), channels(c), samples(std::move(s)) {
    validate();
  }

  void validate() const {
    if (width < 1 || height < 1) throw InputError("image dimensions must be >= 1");
    if (channels != 1 && channels != 3) {
      throw InputError("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
    if (samples.size() != width * height * channels) {
      throw InputError("image sample count does not match its dimensions");
    }
  }

  std::string describe() const {
    return std::to_string(width) + "x" + std::to_string(height) + "x" +
           std::to_string(channels);
  }
};

// PPM (P6, maxval 255) --------------------------------------------------------

namespace detail {

inline std::size_t ppm_token(const std::vector<std::uint8_t>& b, std::size_t& pos,
                             const std::string& src) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t v = 0;
  std::size_t digits = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos++] - '0');
    if (++digits > 9) throw InputError(src + ": PPM header value too large");
  }
  if (digits == 0) throw InputError(src + ": malformed PPM header");
  return v;
}

}  // namespace detail

inline ImageBuffer read_ppm(const std::filesystem::path& path) {
  const std::string src = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + src);
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  if (b.size() < 2 || b[0] != 'P' || b[1] != '6') throw InputError(src + ": not a P6 PPM");
  std::size_t pos = 2;
  const auto w = detail::ppm_token(b, pos, src);
  const auto h = detail::ppm_token(b, pos, src);
  const auto maxval = detail::ppm_token(b, pos, src);
  if (maxval != 255) throw InputError(src + ": only maxval 255 is supported");
  if (pos >= b.size() || !std::isspace(b[pos])) throw InputError(src + ": malformed PPM header");
  ++pos;
  const std::size_t n = w * h * 3;
  if (b.size() - pos < n) throw InputError(src + ": truncated PPM payload");
  return ImageBuffer(w, h, 3,
                     std::vector<std::uint8_t>(b.begin() + static_cast<std::ptrdiff_t>(pos),
                                               b.begin() + static_cast<std::ptrdiff_t>(pos + n)));
}

inline void write_ppm(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.channels != 3) throw InputError("PPM output needs 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.samples.data()),
            static_cast<std::streamsize>(img.samples.size()));
}

// PNG ------------------------------------------------------------------------

/// Reads an 8-bit grayscale or color PNG; any alpha channel is dropped.
inline ImageBuffer read_png(const std::filesystem::path& path) {
  const std::string src = path.string();
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, src.c_str())) {
    throw InputError(src + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw InputError(src + ": only 8-bit PNG images are supported");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  // Read with alpha when present so it can be dropped rather than composited.
  image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                       : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw InputError(src + ": " + msg);
  }
  const std::size_t channels = color ? 3 : 1;
  const std::size_t stride = channels + (alpha ? 1 : 0);
  const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
  if (!alpha) return ImageBuffer(image.width, image.height, channels, std::move(raw));
  std::vector<std::uint8_t> samples(pixels * channels);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < channels; ++c) samples[p * channels + c] = raw[p * stride + c];
  }
  return ImageBuffer(image.width, image.height, channels, std::move(samples));
}

inline void write_png(const ImageBuffer& img, const std::filesystem::path& path) {
  img.validate();
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.samples.data(), 0,
                               nullptr)) {
    throw InputError(path.string() + ": " + image.message);
  }
}

/// Dispatches on the file signature.
inline ImageBuffer read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char sig[2] = {};
  in.read(sig, 2);
  if (in.gcount() == 2 && sig[0] == 'P' && sig[1] == '6') return read_ppm(path);
  return read_png(path);
}

}  // namespace morphlab
