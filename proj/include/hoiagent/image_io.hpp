#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hoiagent {

/// 8-bit RGBA raster, row-major interleaved. PNG is the one mandatory
/// format; every decode canonicalizes to RGBA so crops compare
/// pixel-for-pixel regardless of the source color type.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 4

  std::uint8_t* row(int y) { return pixels.data() + static_cast<size_t>(y) * width * 4; }
  const std::uint8_t* row(int y) const {
    return pixels.data() + static_cast<size_t>(y) * width * 4;
  }
};

/// Decodes a PNG file. Throws DataError on unreadable or non-PNG input.
Image read_png(const std::string& path);

Image decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const Image& image);

void write_png(const std::string& path, const Image& image);

/// Copies the pixel window [x0,x1) x [y0,y1); bounds must be inside the
/// image and non-empty.
Image crop_pixels(const Image& image, int x0, int y0, int x1, int y1);

}  // namespace hoiagent
