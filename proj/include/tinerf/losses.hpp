#pragma once

#include <cstddef>

// Loss bookkeeping. Gradients of these quantities flow through the training
// graph (sq_err / sqdiff / row_sqdiff nodes); the helpers here compute the
// same values standalone for logging and for tests that need an independent
// reference.

namespace tinerf {

// Mean over rays of the per-ray channel-summed squared RGB error.
double color_loss(const double* pred_rgb, const double* gt_rgb, size_t n_rays);

// ||a - b||^2 over dim entries.
double feature_sqdiff(const double* a, const double* b, int dim);

// Total objective: reconstruction plus weighted smoothness.
inline double total_loss(double lc, double ls, double lambda) {
  return lc + lambda * ls;
}

}  // namespace tinerf
