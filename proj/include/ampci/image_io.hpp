#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampci/planes.hpp"

namespace ampci {

// Rec. 601 luma weights for colour inputs.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

namespace detail {

inline void skip_pnm_space(const std::vector<unsigned char>& buf, std::size_t& pos) {
  while (pos < buf.size()) {
    if (buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (std::isspace(buf[pos])) {
      ++pos;
    } else {
      break;
    }
  }
}

inline std::size_t read_pnm_int(const std::vector<unsigned char>& buf, std::size_t& pos, const std::string& what) {
  skip_pnm_space(buf, pos);
  if (pos >= buf.size() || !std::isdigit(buf[pos])) throw std::runtime_error("pgm: malformed header (" + what + ")");
  std::size_t v = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) v = v * 10 + (buf[pos++] - '0');
  return v;
}

}  // namespace detail

/// Binary PGM (P5), 8- or 16-bit. Pixels divided by maxval.
inline ImagePlane load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') throw std::runtime_error("pgm: not a binary P5 file: " + path.string());
  std::size_t pos = 2;
  const std::size_t width = detail::read_pnm_int(buf, pos, "width");
  const std::size_t height = detail::read_pnm_int(buf, pos, "height");
  const std::size_t maxval = detail::read_pnm_int(buf, pos, "maxval");
  if (width == 0 || height == 0) throw std::runtime_error("pgm: zero dimension in " + path.string());
  if (maxval == 0 || maxval > 65535) throw std::runtime_error("pgm: invalid maxval in " + path.string());
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw std::runtime_error("pgm: malformed header in " + path.string());
  ++pos;
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  if (buf.size() - pos < width * height * bytes_per) throw std::runtime_error("pgm: truncated data in " + path.string());

  ImagePlane img(height, width);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < width * height; ++i) {
    const std::size_t v = bytes_per == 1 ? buf[pos + i] : (std::size_t{buf[pos + 2 * i]} << 8) | buf[pos + 2 * i + 1];
    img.pixels[i] = static_cast<double>(std::min(v, maxval)) * scale;
  }
  return img;
}

/// Writes a P5 file, clamping pixels to [0,1] and quantizing to `maxval`.
inline void save_pgm(const ImagePlane& img, const std::filesystem::path& path, unsigned maxval = 255) {
  if (maxval == 0 || maxval > 65535) throw std::invalid_argument("save_pgm: maxval outside 1..65535");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_pgm: cannot open " + path.string());
  out << "P5\n" << img.cols << ' ' << img.rows << '\n' << maxval << '\n';
  for (double p : img.pixels) {
    const auto v = static_cast<unsigned>(std::lround(std::clamp(p, 0.0, 1.0) * maxval));
    if (maxval < 256) {
      out.put(static_cast<char>(v));
    } else {
      out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xFF));
    }
  }
  if (!out) throw std::runtime_error("save_pgm: write failed for " + path.string());
}

namespace detail {

struct PngDecoded {
  std::size_t width = 0, height = 0;
  int channels = 0, bit_depth = 0;
  std::vector<unsigned char> data;
};

// libpng reports errors by longjmp; every object with a destructor is
// declared before the setjmp point.
inline bool decode_png(std::FILE* fp, PngDecoded& out, std::string& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) {
    err = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    err = "png_create_info_struct failed";
    return false;
  }
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    err = "libpng decode error";
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.data.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (std::size_t r = 0; r < out.height; ++r) rows[r] = out.data.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace detail

/// PNG, 8- or 16-bit, grayscale or colour (converted with Rec. 601 weights).
inline ImagePlane load_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw std::runtime_error("png: cannot open " + path.string());
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    std::fclose(fp);
    throw std::runtime_error("png: bad signature in " + path.string());
  }
  std::rewind(fp);
  detail::PngDecoded dec;
  std::string err;
  const bool ok = detail::decode_png(fp, dec, err);
  std::fclose(fp);
  if (!ok) throw std::runtime_error("png: " + err + " in " + path.string());
  if (dec.channels != 1 && dec.channels != 3) throw std::runtime_error("png: unsupported channel layout in " + path.string());

  const bool wide = dec.bit_depth == 16;
  const double scale = 1.0 / (wide ? 65535.0 : 255.0);
  const std::size_t bps = wide ? 2 : 1;
  auto sample = [&](std::size_t idx) -> double {
    const unsigned char* p = dec.data.data() + idx * bps;
    return wide ? static_cast<double>((p[0] << 8) | p[1]) : static_cast<double>(p[0]);
  };
  ImagePlane img(dec.height, dec.width);
  for (std::size_t i = 0; i < dec.width * dec.height; ++i) {
    if (dec.channels == 1)
      img.pixels[i] = sample(i) * scale;
    else
      img.pixels[i] =
          (kLumaR * sample(3 * i) + kLumaG * sample(3 * i + 1) + kLumaB * sample(3 * i + 2)) * scale;
  }
  return img;
}

/// Dispatches on file contents (P5 or PNG signature).
inline ImagePlane load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char head[2] = {};
  in.read(head, 2);
  if (in.gcount() == 2 && head[0] == 'P' && head[1] == '5') return load_pgm(path);
  if (in.gcount() == 2 && static_cast<unsigned char>(head[0]) == 0x89 && head[1] == 'P') return load_png(path);
  throw std::runtime_error("unsupported image format: " + path.string());
}

}  // namespace ampci
