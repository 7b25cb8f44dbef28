#pragma once

#include "tinerf/image.hpp"

// Image fidelity metrics. SSIM runs on the luma plane (Rec. 601 weights
// 0.299/0.587/0.114) with the standard 11x11 Gaussian window, sigma 1.5,
// C1 = 0.01^2, C2 = 0.03^2, averaged over all fully-inside windows.

namespace tinerf {

// 10*log10(1/MSE) over all RGB values; identical images -> +inf.
double psnr(const Image& a, const Image& b);

// Mean local SSIM in [-1, 1]; rejects images smaller than the window.
double ssim(const Image& a, const Image& b);

}  // namespace tinerf
