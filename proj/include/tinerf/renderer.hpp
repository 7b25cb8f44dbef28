#pragma once

#include <cstdint>
#include <vector>

#include "tinerf/camera.hpp"
#include "tinerf/field.hpp"
#include "tinerf/image.hpp"
#include "tinerf/occupancy.hpp"
#include "tinerf/parallel.hpp"
#include "tinerf/sampling.hpp"

// No-grad rendering. The grid path marches fixed steps through the scene box
// and skips cells the occupancy cache marks empty; the neural path runs the
// coarse stratified pass, importance-resamples against its weights, and
// composites the fine pass. Both reuse the exact kernels the training graph
// evaluates, so a render from a restored checkpoint reproduces training-time
// eval renders bit for bit.

namespace tinerf {

struct RenderOptions {
  double aabb_lo[3] = {0.0, 0.0, 0.0};  // world-space scene box
  double aabb_hi[3] = {1.0, 1.0, 1.0};
  double near = 0.0;  // extra clip along the ray, world units
  double far = 1e30;
  int n_coarse = 64;      // neural stratified samples
  int n_fine = 64;        // neural importance samples
  int march_steps = 256;  // grid fixed-step count across the box span
  double bg[3] = {0.0, 0.0, 0.0};
  const OccupancyGrid* occ = nullptr;  // grid path skip structure (optional)
  double alpha_x = 1e9, alpha_z = 1e9;  // posenc windows (fully open = large)
};

struct PixelRender {
  double rgb[3] = {0.0, 0.0, 0.0};
  double depth = 0.0;
  double opacity = 0.0;
  uint64_t field_evals = 0;
};

// World point -> unit-cube coordinates of the scene box.
void to_unit_cube(const RenderOptions& opt, const double p[3], double out[3]);

// Clip a ray against the scene box and [near, far]. False = nothing to render.
bool clip_ray(const Ray& ray, const RenderOptions& opt, double* u0, double* u1);

// Fixed-step cell-skipping march over [u0, u1]: midpoints of steps whose
// occupancy cell is marked (all of them when opt.occ is null). du = step for
// every kept sample; skipped cells contribute exactly zero density.
void march_ray(const Ray& ray, double u0, double u1, const RenderOptions& opt,
               std::vector<SamplePoint>& out);

// Renders one pixel. `seed` scopes the per-pixel RNG streams; pass the same
// seed to reproduce a render regardless of threading or pixel order.
PixelRender render_pixel(const Tape& tape, const FieldModel& model,
                         const Camera& cam, int px, int py, const TimeContext& tc,
                         const RenderOptions& opt, uint64_t seed);

// Full frame, parallel over row chunks. Accumulates field evaluations into
// *field_evals when given.
Image render_image(const Tape& tape, const FieldModel& model, const Camera& cam,
                   const TimeContext& tc, const RenderOptions& opt, uint64_t seed,
                   ThreadPool* pool = nullptr, uint64_t* field_evals = nullptr);

}  // namespace tinerf
