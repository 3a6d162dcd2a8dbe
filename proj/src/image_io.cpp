#include "erpflow/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "erpflow/errors.hpp"
#include "erpflow/flow_io.hpp"

namespace erpflow {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ErpImage<float> read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw BadMagic(path + ": not a valid PNG file");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  ErpImage<float> img(ErpGrid{w, h}, channels == 1 ? 1 : 3);
  for (int j = 0; j < h; ++j) {
    png_read_row(png, row.data(), nullptr);
    for (int i = 0; i < w; ++i)
      for (int c = 0; c < img.channels(); ++c)
        img.planes[c](j, i) = float(row[i * channels + c]) / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::string& path, const ErpImage<float>& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw DimensionMismatch("write_png: only 1- or 3-channel images");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG write failed on " + path);
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);  // fixed settings keep outputs deterministic
  png_set_IHDR(png, info, img.grid.width, img.grid.height, 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(std::size_t(img.grid.width) * img.channels());
  for (int j = 0; j < img.grid.height; ++j) {
    for (int i = 0; i < img.grid.width; ++i)
      for (int c = 0; c < img.channels(); ++c) {
        const float v = std::clamp(img.planes[c](j, i), 0.0f, 1.0f);
        row[std::size_t(i) * img.channels() + c] = png_byte(std::lround(v * 255.0f));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ErpImage<float> read_image(const std::string& path) {
  if (has_suffix(path, ".pfm")) return read_pfm(path);
  return read_png(path);
}

void write_image(const std::string& path, const ErpImage<float>& img) {
  if (has_suffix(path, ".pfm")) write_pfm(path, img);
  else write_png(path, img);
}

}  // namespace erpflow
