#include <doctest.h>

#include <cmath>
#include <vector>

#include "tinerf/metrics.hpp"
#include "tinerf/rng.hpp"

using namespace tinerf;

namespace {

Image random_image(int w, int h, uint64_t seed) {
  Image img(w, h);
  Rng rng(seed, RngStream::misc, 0ull);
  for (double& v : img.rgb) v = rng.uniform();
  return img;
}

// Reference SSIM built the other way around: separable Gaussian filtering of
// whole planes (mu, raw second moments), then the per-pixel SSIM map averaged
// over windows that fit entirely inside the image. Same definition, disjoint
// code path from the per-window accumulation in the library.
std::vector<double> filter_valid(const std::vector<double>& p, int w, int h,
                                 const std::vector<double>& k, int* ow, int* oh) {
  int r = static_cast<int>(k.size());
  int vw = w - r + 1, vh = h - r + 1;
  std::vector<double> rows(static_cast<size_t>(vw) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < vw; ++x) {
      double s = 0.0;
      for (int i = 0; i < r; ++i) s += k[static_cast<size_t>(i)] * p[static_cast<size_t>(y) * w + x + i];
      rows[static_cast<size_t>(y) * vw + x] = s;
    }
  std::vector<double> out(static_cast<size_t>(vw) * vh, 0.0);
  for (int y = 0; y < vh; ++y)
    for (int x = 0; x < vw; ++x) {
      double s = 0.0;
      for (int j = 0; j < r; ++j) s += k[static_cast<size_t>(j)] * rows[static_cast<size_t>(y + j) * vw + x];
      out[static_cast<size_t>(y) * vw + x] = s;
    }
  *ow = vw;
  *oh = vh;
  return out;
}

double ssim_reference(const Image& a, const Image& b) {
  int w = a.width, h = a.height;
  std::vector<double> ya(static_cast<size_t>(w) * h), yb(ya.size());
  for (size_t p = 0; p < ya.size(); ++p) {
    ya[p] = 0.299 * a.rgb[3 * p] + 0.587 * a.rgb[3 * p + 1] + 0.114 * a.rgb[3 * p + 2];
    yb[p] = 0.299 * b.rgb[3 * p] + 0.587 * b.rgb[3 * p + 1] + 0.114 * b.rgb[3 * p + 2];
  }
  std::vector<double> k(11);
  double ks = 0.0;
  for (int i = 0; i < 11; ++i) {
    double d = i - 5.0;
    k[static_cast<size_t>(i)] = std::exp(-d * d / 4.5);
    ks += k[static_cast<size_t>(i)];
  }
  for (double& v : k) v /= ks;

  std::vector<double> ya2(ya.size()), yb2(ya.size()), yab(ya.size());
  for (size_t p = 0; p < ya.size(); ++p) {
    ya2[p] = ya[p] * ya[p];
    yb2[p] = yb[p] * yb[p];
    yab[p] = ya[p] * yb[p];
  }
  int vw, vh;
  auto mu_a = filter_valid(ya, w, h, k, &vw, &vh);
  auto mu_b = filter_valid(yb, w, h, k, &vw, &vh);
  auto m_aa = filter_valid(ya2, w, h, k, &vw, &vh);
  auto m_bb = filter_valid(yb2, w, h, k, &vw, &vh);
  auto m_ab = filter_valid(yab, w, h, k, &vw, &vh);
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  for (size_t p = 0; p < mu_a.size(); ++p) {
    double va = m_aa[p] - mu_a[p] * mu_a[p];
    double vb = m_bb[p] - mu_b[p] * mu_b[p];
    double cov = m_ab[p] - mu_a[p] * mu_b[p];
    total += ((2.0 * mu_a[p] * mu_b[p] + c1) * (2.0 * cov + c2)) /
             ((mu_a[p] * mu_a[p] + mu_b[p] * mu_b[p] + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace

TEST_CASE("psnr closed forms") {
  Image a(8, 8), b(8, 8);
  for (double& v : b.rgb) v = 0.5;
  // constant error 0.5 -> mse 0.25 -> 10 log10(4)
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, a) > 0.0);

  Image c(8, 7);
  CHECK_THROWS(psnr(a, c));
  Image e0, e1;
  CHECK_THROWS(psnr(e0, e1));
}

TEST_CASE("ssim equals the plane-filtering reference") {
  Image a = random_image(24, 17, 101);
  Image b = random_image(24, 17, 202);
  CHECK(ssim(a, b) == doctest::Approx(ssim_reference(a, b)).epsilon(1e-6));

  // a correlated pair: b = a + small deterministic perturbation, clipped
  Image c = a;
  Rng rng(303, RngStream::misc, 1ull);
  for (double& v : c.rgb) {
    v += 0.08 * (rng.uniform() - 0.5);
    v = std::fmin(1.0, std::fmax(0.0, v));
  }
  double s = ssim(a, c);
  CHECK(s == doctest::Approx(ssim_reference(a, c)).epsilon(1e-6));
  CHECK(s > ssim(a, b));  // closer pair scores higher
  CHECK(s < 1.0);
}

TEST_CASE("ssim fixed points and rejection") {
  Image a = random_image(16, 16, 7);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  Image tiny_a(10, 11), tiny_b(10, 11);
  CHECK_THROWS(ssim(tiny_a, tiny_b));
  Image wide_a(11, 11), wide_b(12, 11);
  CHECK_THROWS(ssim(wide_a, wide_b));
}
