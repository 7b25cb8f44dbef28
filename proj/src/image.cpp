#include "tinerf/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tinerf {

namespace {

uint8_t quantize(double v) {
  if (v <= 0.0) return 0;
  if (v >= 1.0) return 255;
  return static_cast<uint8_t>(std::floor(v * 255.0 + 0.5));
}

struct File {
  FILE* f;
  explicit File(FILE* fp) : f(fp) {}
  ~File() {
    if (f) fclose(f);
  }
};

}  // namespace

void write_png(const Image& img, const std::string& path) {
  File fh(fopen(path.c_str(), "wb"));
  if (!fh.f) throw std::runtime_error("cannot open for write: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                            nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng write error: " + path);
  }
  png_init_io(png, fh.f);

  int channels = img.has_alpha() ? 4 : 3;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8,
               channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(img.width) * channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double* p = img.px(x, y);
      row[static_cast<size_t>(x) * channels + 0] = quantize(p[0]);
      row[static_cast<size_t>(x) * channels + 1] = quantize(p[1]);
      row[static_cast<size_t>(x) * channels + 2] = quantize(p[2]);
      if (channels == 4)
        row[static_cast<size_t>(x) * channels + 3] =
            quantize(img.alpha[static_cast<size_t>(y) * img.width + x]);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image load_png(const std::string& path) {
  File fh(fopen(path.c_str(), "rb"));
  if (!fh.f) throw std::runtime_error("cannot open image: " + path);

  png_byte header[8];
  if (fread(header, 1, 8, fh.f) != 8 || png_sig_cmp(header, 0, 8) != 0)
    throw std::runtime_error("not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                           nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng read error: " + path);
  }
  png_init_io(png, fh.f);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);

  // normalize everything to 8-bit RGB or RGBA
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  if (channels != 3 && channels != 4) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unsupported channel count in " + path);
  }

  Image img(static_cast<int>(w), static_cast<int>(h), channels == 4);
  std::vector<uint8_t> row(static_cast<size_t>(w) * channels);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      double* p = img.px(static_cast<int>(x), static_cast<int>(y));
      p[0] = row[static_cast<size_t>(x) * channels + 0] / 255.0;
      p[1] = row[static_cast<size_t>(x) * channels + 1] / 255.0;
      p[2] = row[static_cast<size_t>(x) * channels + 2] / 255.0;
      if (channels == 4)
        img.alpha[static_cast<size_t>(y) * w + x] =
            row[static_cast<size_t>(x) * channels + 3] / 255.0;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void composite_over(Image& img, const double bg[3]) {
  if (!img.has_alpha()) return;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double a = img.alpha[static_cast<size_t>(y) * img.width + x];
      double* p = img.px(x, y);
      for (int c = 0; c < 3; ++c) p[c] = p[c] * a + bg[c] * (1.0 - a);
    }
  }
  img.alpha.clear();
}

}  // namespace tinerf
