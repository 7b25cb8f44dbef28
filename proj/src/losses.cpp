#include "tinerf/losses.hpp"

namespace tinerf {

double color_loss(const double* pred_rgb, const double* gt_rgb, size_t n_rays) {
  if (n_rays == 0) return 0.0;
  double acc = 0.0;
  for (size_t r = 0; r < n_rays; ++r) {
    for (int c = 0; c < 3; ++c) {
      double e = pred_rgb[3 * r + c] - gt_rgb[3 * r + c];
      acc += e * e;
    }
  }
  return acc / static_cast<double>(n_rays);
}

double feature_sqdiff(const double* a, const double* b, int dim) {
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) {
    double e = a[i] - b[i];
    acc += e * e;
  }
  return acc;
}

}  // namespace tinerf
