#include "tinerf/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tinerf {

double psnr(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("psnr: image dimensions differ");
  if (a.rgb.empty()) throw std::invalid_argument("psnr: empty image");
  double se = 0.0;
  for (size_t i = 0; i < a.rgb.size(); ++i) {
    double d = a.rgb[i] - b.rgb[i];
    se += d * d;
  }
  double mse = se / static_cast<double>(a.rgb.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

std::vector<double> luma_plane(const Image& img) {
  std::vector<double> y(static_cast<size_t>(img.width) * img.height);
  for (size_t p = 0; p < y.size(); ++p) {
    const double* c = img.rgb.data() + 3 * p;
    y[p] = 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
  }
  return y;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("ssim: image dimensions differ");
  if (a.width < kWin || a.height < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  double w[kWin];
  double wsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    double d = i - (kWin - 1) / 2.0;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    wsum += w[i];
  }
  for (double& v : w) v /= wsum;

  std::vector<double> ya = luma_plane(a), yb = luma_plane(b);
  const int width = a.width, height = a.height;
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  double total = 0.0;
  size_t windows = 0;
  for (int y0 = 0; y0 + kWin <= height; ++y0) {
    for (int x0 = 0; x0 + kWin <= width; ++x0) {
      double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
      for (int j = 0; j < kWin; ++j) {
        const double* ra = ya.data() + static_cast<size_t>(y0 + j) * width + x0;
        const double* rb = yb.data() + static_cast<size_t>(y0 + j) * width + x0;
        for (int i = 0; i < kWin; ++i) {
          double wij = w[j] * w[i];
          mu_a += wij * ra[i];
          mu_b += wij * rb[i];
          aa += wij * ra[i] * ra[i];
          bb += wij * rb[i] * rb[i];
          ab += wij * ra[i] * rb[i];
        }
      }
      double var_a = aa - mu_a * mu_a;
      double var_b = bb - mu_b * mu_b;
      double cov = ab - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

}  // namespace tinerf
