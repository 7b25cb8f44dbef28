#pragma once

#include <algorithm>

// View-direction and positional encodings. The sin/cos frequency encoding
// itself lives in kernels.hpp (shared with the autodiff graph); here are the
// pieces with no gradient path.

namespace tinerf {

// Real spherical harmonics basis up to degree 3 (16 coefficients) evaluated
// at a unit direction. Convention: the common real orthonormal basis with
// all-positive Cartesian coefficients, e.g. Y00 = 0.28209479177387814,
// Y1m = 0.4886025119029199 * {y, z, x}. At d = +z every m != 0 term is zero.
void sh16(const double dir[3], double out[16]);

constexpr int kShDim = 16;

// Coarse-to-fine frequency window: alpha ramps linearly from 0 to `bands`
// over the first `ramp_frac` of training, then stays fully open.
inline double posenc_alpha(uint64_t iter, uint64_t total_iters, int bands,
                           double ramp_frac) {
  if (total_iters == 0 || ramp_frac <= 0.0) return static_cast<double>(bands);
  double ramp_end = ramp_frac * static_cast<double>(total_iters);
  double t = static_cast<double>(iter) / ramp_end;
  return static_cast<double>(bands) * std::min(1.0, t);
}

}  // namespace tinerf
