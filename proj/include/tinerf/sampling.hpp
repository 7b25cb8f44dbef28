#pragma once

#include <vector>

#include "tinerf/rng.hpp"

// Depth sampling along rays: stratified bins for the coarse pass and
// inverse-CDF importance resampling for the fine pass.

namespace tinerf {

struct SamplePoint {
  double u = 0.0;   // depth along the ray
  double du = 0.0;  // quadrature segment length
};

constexpr double kTerminalDu = 1e10;  // "infinite" last bin

// One uniform draw per bin of [u_near, u_far] split into n equal bins;
// du = bin width except the last sample, which uses the terminal value.
std::vector<SamplePoint> stratified_samples(double u_near, double u_far, int n,
                                            Rng& rng);

// Inverse-transform draws from the piecewise-constant PDF over the n coarse
// bins (weights >= 0), merged ascending with the coarse depths; du's are
// recomputed as successive differences (terminal last). All-zero weights fall
// back to a uniform PDF (every bin weight 1).
std::vector<SamplePoint> importance_samples(double u_near, double u_far,
                                            const std::vector<double>& coarse_u,
                                            const std::vector<double>& weights,
                                            int m, Rng& rng);

}  // namespace tinerf
