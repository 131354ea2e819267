#include "hoiagent/image_io.hpp"

#include <cstring>
#include <fstream>

#include <png.h>

#include "hoiagent/errors.hpp"

namespace hoiagent {

namespace {

Image finish_read(png_image& descriptor, const std::string& what) {
  descriptor.format = PNG_FORMAT_RGBA;
  Image image;
  image.width = static_cast<int>(descriptor.width);
  image.height = static_cast<int>(descriptor.height);
  image.pixels.resize(PNG_IMAGE_SIZE(descriptor));
  if (!png_image_finish_read(&descriptor, nullptr, image.pixels.data(), 0, nullptr)) {
    std::string message = descriptor.message;
    png_image_free(&descriptor);
    throw DataError(what + ": " + message);
  }
  return image;
}

}  // namespace

Image read_png(const std::string& path) {
  png_image descriptor;
  std::memset(&descriptor, 0, sizeof(descriptor));
  descriptor.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&descriptor, path.c_str())) {
    throw DataError("cannot read PNG '" + path + "': " + descriptor.message);
  }
  return finish_read(descriptor, "cannot read PNG '" + path + "'");
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image descriptor;
  std::memset(&descriptor, 0, sizeof(descriptor));
  descriptor.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&descriptor, bytes.data(), bytes.size())) {
    throw DataError(std::string("cannot decode PNG: ") + descriptor.message);
  }
  return finish_read(descriptor, "cannot decode PNG");
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<size_t>(image.width) * image.height * 4) {
    throw DataError("encode_png: inconsistent image buffer");
  }
  png_image descriptor;
  std::memset(&descriptor, 0, sizeof(descriptor));
  descriptor.version = PNG_IMAGE_VERSION;
  descriptor.width = static_cast<png_uint_32>(image.width);
  descriptor.height = static_cast<png_uint_32>(image.height);
  descriptor.format = PNG_FORMAT_RGBA;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&descriptor, nullptr, &size, 0, image.pixels.data(), 0,
                                 nullptr)) {
    throw DataError(std::string("encode_png: ") + descriptor.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&descriptor, out.data(), &size, 0, image.pixels.data(), 0,
                                 nullptr)) {
    throw DataError(std::string("encode_png: ") + descriptor.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::string& path, const Image& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to '" + path + "'");
}

Image crop_pixels(const Image& image, int x0, int y0, int x1, int y1) {
  if (x0 < 0 || y0 < 0 || x1 > image.width || y1 > image.height || x0 >= x1 || y0 >= y1) {
    throw DataError("crop window is empty or outside the image");
  }
  Image out;
  out.width = x1 - x0;
  out.height = y1 - y0;
  out.pixels.resize(static_cast<size_t>(out.width) * out.height * 4);
  for (int y = y0; y < y1; ++y) {
    std::memcpy(out.row(y - y0), image.row(y) + static_cast<size_t>(x0) * 4,
                static_cast<size_t>(out.width) * 4);
  }
  return out;
}

}  // namespace hoiagent
