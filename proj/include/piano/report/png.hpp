#pragma once

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"

namespace piano {

namespace detail {

inline void png_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& data) {
  png_be32(out, static_cast<std::uint32_t>(data.size()));
  std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start)));
  png_be32(out, crc);
}

}  // namespace detail

// 8-bit RGB PNG, rgb row-major [height, width, 3].
inline void write_png(const std::string& path,
                      const std::vector<std::uint8_t>& rgb, int width,
                      int height) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw ConfigError("write_png: buffer size mismatch");

  // Raw image: filter byte 0 per scanline.
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * width));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const std::uint8_t* row = rgb.data() + static_cast<std::size_t>(y) * width * 3;
    raw.insert(raw.end(), row, row + static_cast<std::size_t>(width) * 3);
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(),
                static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw FormatError("write_png: compression failed");
  comp.resize(comp_len);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  detail::png_be32(ihdr, static_cast<std::uint32_t>(width));
  detail::png_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  detail::png_chunk(out, "IHDR", ihdr);
  detail::png_chunk(out, "IDAT", comp);
  detail::png_chunk(out, "IEND", {});

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw FormatError("write_png: cannot open " + path);
  std::size_t n = std::fwrite(out.data(), 1, out.size(), f);
  std::fclose(f);
  if (n != out.size()) throw FormatError("write_png: short write to " + path);
}

// Diverging blue-white-red colormap over [vmin, vmax].
inline void heatmap_rgb(const double* field, int width, int height,
                        double vmin, double vmax,
                        std::vector<std::uint8_t>& rgb) {
  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  double span = vmax - vmin;
  if (!(span > 0.0)) span = 1.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(width) * height; ++i) {
    double t = std::clamp((field[i] - vmin) / span, 0.0, 1.0);
    double r, g, b;
    if (t < 0.5) {
      double u = t * 2.0;  // blue -> white
      r = 0.2 + 0.8 * u;
      g = 0.3 + 0.7 * u;
      b = 1.0;
    } else {
      double u = (t - 0.5) * 2.0;  // white -> red
      r = 1.0;
      g = 1.0 - 0.7 * u;
      b = 1.0 - 0.8 * u;
    }
    rgb[3 * i] = static_cast<std::uint8_t>(std::lround(255 * r));
    rgb[3 * i + 1] = static_cast<std::uint8_t>(std::lround(255 * g));
    rgb[3 * i + 2] = static_cast<std::uint8_t>(std::lround(255 * b));
  }
}

// Side-by-side predicted vs. true field heatmap with a 2-pixel separator,
// shared symmetric color range.
inline void write_comparison_heatmap(const std::string& path,
                                     const double* pred, const double* truth,
                                     int nx, int ny) {
  double vmax = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(nx) * ny; ++i) {
    vmax = std::max(vmax, std::abs(pred[i]));
    vmax = std::max(vmax, std::abs(truth[i]));
  }
  if (!(vmax > 0.0)) vmax = 1.0;
  const int sep = 2, W = 2 * ny + sep, H = nx;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(W) * H * 3, 0);
  std::vector<std::uint8_t> left, right;
  heatmap_rgb(pred, ny, nx, -vmax, vmax, left);
  heatmap_rgb(truth, ny, nx, -vmax, vmax, right);
  for (int r = 0; r < H; ++r) {
    std::copy(left.begin() + static_cast<std::size_t>(r) * ny * 3,
              left.begin() + static_cast<std::size_t>(r + 1) * ny * 3,
              rgb.begin() + static_cast<std::size_t>(r) * W * 3);
    std::copy(right.begin() + static_cast<std::size_t>(r) * ny * 3,
              right.begin() + static_cast<std::size_t>(r + 1) * ny * 3,
              rgb.begin() + (static_cast<std::size_t>(r) * W + ny + sep) * 3);
  }
  write_png(path, rgb, W, H);
}

}  // namespace piano
