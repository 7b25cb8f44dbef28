#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tinerf/camera.hpp"
#include "tinerf/dataset.hpp"
#include "tinerf/image.hpp"

// Closed-form emissive scenes used as ground truth: density and color are
// analytic in (x, t), so the volume-rendering integral can be evaluated to
// quadrature accuracy without any model in the loop.
//
// Scenes:
//   blob-bounce:  emissive sphere on a parabolic arc over a checkered slab.
//   split-merge:  two spheres merging and separating (topology probe).
//   corner-flash: blob-bounce plus a pillar hidden behind a wall; the pillar
//                 is visible from one training view only, so features there
//                 are trained at a single time (smoothness-ablation probe).

namespace tinerf {

struct AnalyticScene {
  std::string name;
  double aabb_lo[3] = {-1.5, -1.5, -1.5};
  double aabb_hi[3] = {1.5, 1.5, 1.5};
  // x in world coordinates, t in [0,1]; sigma >= 0, color in [0,1]^3
  std::function<double(const double x[3], double t)> sigma;
  std::function<void(const double x[3], double t, double rgb[3])> color;
};

AnalyticScene make_scene(const std::string& name);

// Midpoint-rule integration of the rendering integral along each pixel ray
// clipped to the scene box; output is straight-alpha RGBA (alpha = opacity).
Image render_oracle(const AnalyticScene& scene, const Camera& cam, double t,
                    int n_samples);

struct SynthConfig {
  std::string scene = "blob-bounce";
  int width = 64;
  int height = 64;
  int n_frames = 20;                          // total timeline length
  std::vector<int> test_frames = {3, 8, 13, 18};  // held-out (pose, time) pairs
  int oracle_samples = 768;
  double fov_deg = 50.0;
  double orbit_radius = 3.8;
};

// Renders the oracle ground truth for every frame and writes
// transforms_train/transforms_test (+ PNGs) under root. The first frame is
// Richardson-checked: doubling oracle_samples must move no pixel by >= 1e-3.
void generate_dataset(const SynthConfig& cfg, const std::string& root);

}  // namespace tinerf
