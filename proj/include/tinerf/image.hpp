#pragma once

#include <string>
#include <vector>

// Planar double-precision images in [0,1] plus 8-bit PNG I/O.

namespace tinerf {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;    // 3 doubles per pixel, row-major
  std::vector<double> alpha;  // empty, or 1 double per pixel (straight alpha)

  Image() = default;
  Image(int w, int h, bool with_alpha = false)
      : width(w),
        height(h),
        rgb(static_cast<size_t>(w) * h * 3, 0.0),
        alpha(with_alpha ? static_cast<size_t>(w) * h : 0, 0.0) {}

  double* px(int x, int y) { return rgb.data() + 3 * (static_cast<size_t>(y) * width + x); }
  const double* px(int x, int y) const {
    return rgb.data() + 3 * (static_cast<size_t>(y) * width + x);
  }
  bool has_alpha() const { return !alpha.empty(); }
};

// Round-half-up 8-bit quantization (0.5 -> 128); RGBA when alpha is present.
void write_png(const Image& img, const std::string& path);
Image load_png(const std::string& path);

// In-place "over" composite onto a constant background (straight alpha);
// drops the alpha plane.
void composite_over(Image& img, const double bg[3]);

}  // namespace tinerf
