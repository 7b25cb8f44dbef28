#include "tinerf/renderer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "tinerf/encoding.hpp"
#include "tinerf/kernels.hpp"

namespace tinerf {

void to_unit_cube(const RenderOptions& opt, const double p[3], double out[3]) {
  for (int a = 0; a < 3; ++a) {
    double span = opt.aabb_hi[a] - opt.aabb_lo[a];
    out[a] = (p[a] - opt.aabb_lo[a]) / span;
  }
}

bool clip_ray(const Ray& ray, const RenderOptions& opt, double* u0, double* u1) {
  if (!ray_aabb(ray.origin, ray.dir, opt.aabb_lo, opt.aabb_hi, u0, u1))
    return false;
  *u0 = std::max(*u0, opt.near);
  *u1 = std::min(*u1, opt.far);
  return *u0 < *u1;
}

void march_ray(const Ray& ray, double u0, double u1, const RenderOptions& opt,
               std::vector<SamplePoint>& out) {
  out.clear();
  int steps = opt.march_steps;
  double step = (u1 - u0) / static_cast<double>(steps);
  for (int k = 0; k < steps; ++k) {
    double u = u0 + (static_cast<double>(k) + 0.5) * step;
    if (opt.occ) {
      double p[3], xn[3];
      for (int a = 0; a < 3; ++a) p[a] = ray.origin[a] + u * ray.dir[a];
      to_unit_cube(opt, p, xn);
      if (!opt.occ->occupied(xn)) continue;
    }
    out.push_back({u, step});
  }
}

namespace {

// Composite a list of raw-evaluated samples and fold in the background.
void composite_raw(const FieldModel& model, const Tape& tape, const Ray& ray,
                   const TimeContext& tc, const RenderOptions& opt,
                   const double sh_dir[kShDim], const std::vector<SamplePoint>& samples,
                   bool fine, PixelRender* px, std::vector<double>* weights) {
  size_t n = samples.size();
  static thread_local std::vector<double> sigma, rgb, du, u, stash;
  sigma.resize(n);
  rgb.resize(3 * n);
  du.resize(n);
  u.resize(n);
  stash.resize(2 * n);
  for (size_t k = 0; k < n; ++k) {
    double p[3], xn[3];
    for (int a = 0; a < 3; ++a) p[a] = ray.origin[a] + samples[k].u * ray.dir[a];
    to_unit_cube(opt, p, xn);
    model.point_raw(tape, xn, tc, sh_dir, opt.alpha_x, opt.alpha_z, &rgb[3 * k],
                    &sigma[k], fine);
    du[k] = samples[k].du;
    u[k] = samples[k].u;
  }
  double out5[5];
  kernels::composite_forward(sigma.data(), rgb.data(), du.data(), u.data(),
                             static_cast<int>(n), stash.data(), out5);
  double trans = 1.0 - out5[4];
  for (int c = 0; c < 3; ++c) px->rgb[c] = out5[c] + opt.bg[c] * trans;
  px->depth = out5[3];
  px->opacity = out5[4];
  px->field_evals += n;
  if (weights) {
    weights->resize(n);
    const double* alpha = stash.data();
    const double* T = stash.data() + n;
    for (size_t k = 0; k < n; ++k) (*weights)[k] = T[k] * alpha[k];
  }
}

}  // namespace

PixelRender render_pixel(const Tape& tape, const FieldModel& model,
                         const Camera& cam, int px, int py, const TimeContext& tc,
                         const RenderOptions& opt, uint64_t seed) {
  PixelRender out;
  Ray ray = make_ray(cam, px, py);
  ray.t = tc.t;
  ray.pixel = py * cam.width + px;
  double u0, u1;
  if (!clip_ray(ray, opt, &u0, &u1)) {
    for (int c = 0; c < 3; ++c) out.rgb[c] = opt.bg[c];
    return out;
  }
  double sh_dir[kShDim];
  sh16(ray.dir, sh_dir);

  static thread_local std::vector<SamplePoint> samples;
  if (model.rep() == Representation::grid) {
    march_ray(ray, u0, u1, opt, samples);
    if (samples.empty()) {
      for (int c = 0; c < 3; ++c) out.rgb[c] = opt.bg[c];
      return out;
    }
    composite_raw(model, tape, ray, tc, opt, sh_dir, samples, true, &out, nullptr);
    return out;
  }

  // neural: coarse pass for weights, importance-resampled fine pass for color
  uint64_t pix = static_cast<uint64_t>(ray.pixel);
  Rng sr(seed, RngStream::stratified, pix);
  samples = stratified_samples(u0, u1, opt.n_coarse, sr);
  static thread_local std::vector<double> weights, coarse_u;
  PixelRender coarse;
  composite_raw(model, tape, ray, tc, opt, sh_dir, samples, false, &coarse,
                &weights);
  out.field_evals += coarse.field_evals;

  coarse_u.resize(samples.size());
  for (size_t k = 0; k < samples.size(); ++k) coarse_u[k] = samples[k].u;
  Rng ir(seed, RngStream::importance, pix);
  samples = importance_samples(u0, u1, coarse_u, weights, opt.n_fine, ir);
  composite_raw(model, tape, ray, tc, opt, sh_dir, samples, true, &out, nullptr);
  return out;
}

Image render_image(const Tape& tape, const FieldModel& model, const Camera& cam,
                   const TimeContext& tc, const RenderOptions& opt, uint64_t seed,
                   ThreadPool* pool, uint64_t* field_evals) {
  Image img(cam.width, cam.height);
  std::atomic<uint64_t> evals{0};
  auto body = [&](size_t begin, size_t end) {
    uint64_t local = 0;
    for (size_t i = begin; i < end; ++i) {
      int px = static_cast<int>(i) % cam.width;
      int py = static_cast<int>(i) / cam.width;
      PixelRender r = render_pixel(tape, model, cam, px, py, tc, opt, seed);
      for (int c = 0; c < 3; ++c) img.rgb[3 * i + c] = r.rgb[c];
      local += r.field_evals;
    }
    evals.fetch_add(local, std::memory_order_relaxed);
  };
  size_t n = static_cast<size_t>(cam.width) * static_cast<size_t>(cam.height);
  if (pool) {
    pool->for_chunks(n, [&](int, size_t b, size_t e) { body(b, e); });
  } else {
    body(0, n);
  }
  if (field_evals) *field_evals += evals.load();
  return img;
}

}  // namespace tinerf
