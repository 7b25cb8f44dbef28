#include <doctest.h>

#include <cmath>
#include <vector>

#include "tinerf/camera.hpp"
#include "tinerf/kernels.hpp"
#include "tinerf/renderer.hpp"
#include "tinerf/sampling.hpp"

using namespace tinerf;

namespace {

// midpoint-rule composite of an analytic medium, through the shared kernel
double quad_error(int n, double u0, double u1, double sig_a, double sig_b,
                  const double c0[3], double want[3], double bg) {
  std::vector<double> sigma(static_cast<size_t>(n)), rgb(static_cast<size_t>(3 * n));
  std::vector<double> du(static_cast<size_t>(n)), u(static_cast<size_t>(n));
  double h = (u1 - u0) / n;
  for (int k = 0; k < n; ++k) {
    double uk = u0 + (k + 0.5) * h;
    sigma[static_cast<size_t>(k)] = sig_a + sig_b * uk;
    for (int c = 0; c < 3; ++c) rgb[static_cast<size_t>(3 * k + c)] = c0[c];
    du[static_cast<size_t>(k)] = h;
    u[static_cast<size_t>(k)] = uk;
  }
  std::vector<double> stash(static_cast<size_t>(2 * n));
  double out5[5];
  kernels::composite_forward(sigma.data(), rgb.data(), du.data(), u.data(), n,
                             stash.data(), out5);
  double err = 0.0;
  for (int c = 0; c < 3; ++c) {
    double got = out5[c] + (1.0 - out5[4]) * bg;
    err = std::max(err, std::fabs(got - want[c]));
  }
  return err;
}

}  // namespace

TEST_CASE("homogeneous medium matches the closed form exactly") {
  // sigma and color constant: alpha products telescope, so the quadrature is
  // exact at every sample count
  double u0 = 0.4, u1 = 2.9, sig = 0.8, bg = 0.25;
  double c0[3] = {0.9, 0.55, 0.2};
  double trans = std::exp(-sig * (u1 - u0));
  double want[3];
  for (int c = 0; c < 3; ++c) want[c] = c0[c] * (1.0 - trans) + bg * trans;
  for (int n : {16, 32, 64, 128, 256})
    CHECK(quad_error(n, u0, u1, sig, 0.0, c0, want, bg) <= 1e-12);
}

TEST_CASE("linear-ramp medium converges to the closed form") {
  // sigma(u) = a + b u over [u0, u1]: T(u1) = exp(-a L - b (u1^2 - u0^2)/2)
  double u0 = 0.2, u1 = 2.2, a = 0.3, b = 0.6, bg = 0.1;
  double c0[3] = {0.8, 0.4, 0.65};
  double trans = std::exp(-a * (u1 - u0) - 0.5 * b * (u1 * u1 - u0 * u0));
  double want[3];
  for (int c = 0; c < 3; ++c) want[c] = c0[c] * (1.0 - trans) + bg * trans;

  double prev = 1e300;
  for (int n : {16, 32, 64, 128, 256}) {
    double err = quad_error(n, u0, u1, a, b, c0, want, bg);
    CHECK(err < prev);  // strict monotone decay for the inhomogeneous medium
    prev = err;
  }
  CHECK(prev < 1e-3);  // the N = 256 tolerance
}

TEST_CASE("composite opacity matches the transmittance closed form") {
  double u0 = 0.0, u1 = 3.0, a = 0.5, b = 0.25;
  double c0[3] = {1.0, 1.0, 1.0};
  int n = 256;
  std::vector<double> sigma(static_cast<size_t>(n)), rgb(static_cast<size_t>(3 * n));
  std::vector<double> du(static_cast<size_t>(n)), u(static_cast<size_t>(n));
  double h = (u1 - u0) / n;
  for (int k = 0; k < n; ++k) {
    double uk = u0 + (k + 0.5) * h;
    sigma[static_cast<size_t>(k)] = a + b * uk;
    for (int c = 0; c < 3; ++c) rgb[static_cast<size_t>(3 * k + c)] = c0[c];
    du[static_cast<size_t>(k)] = h;
    u[static_cast<size_t>(k)] = uk;
  }
  std::vector<double> stash(static_cast<size_t>(2 * n));
  double out5[5];
  kernels::composite_forward(sigma.data(), rgb.data(), du.data(), u.data(), n,
                             stash.data(), out5);
  double want = 1.0 - std::exp(-a * (u1 - u0) - 0.5 * b * (u1 * u1 - u0 * u0));
  CHECK(out5[4] == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("ray-box clipping and pixel-center ray generation") {
  Camera cam;
  cam.width = 4;
  cam.height = 4;
  cam.focal = 2.0;
  // identity pose at origin looking down -z (transform defaults)
  RenderOptions opt;
  opt.aabb_lo[0] = opt.aabb_lo[1] = opt.aabb_lo[2] = -1.0;
  opt.aabb_hi[0] = opt.aabb_hi[1] = opt.aabb_hi[2] = 1.0;
  opt.near = 0.0;
  opt.far = 10.0;

  Ray r = make_ray(cam, 1, 1);
  // pixel centers: (x + 0.5 - w/2) / focal
  CHECK(r.dir[0] == doctest::Approx((1.5 - 2.0) / 2.0 / std::sqrt(1.0 + 0.125)));
  double u0, u1;
  bool hit = clip_ray(r, opt, &u0, &u1);
  CHECK(hit);
  CHECK(u0 < u1);

  Ray miss;
  miss.origin[0] = 5.0;
  miss.origin[1] = 0.0;
  miss.origin[2] = 0.0;
  miss.dir[0] = 0.0;
  miss.dir[1] = 0.0;
  miss.dir[2] = -1.0;
  CHECK(!clip_ray(miss, opt, &u0, &u1));
}

TEST_CASE("march_ray skips exactly the cells the occupancy grid rejects") {
  Tape tape;
  OccupancyConfig oc;
  oc.res = 4;
  oc.warmup_sweeps = 0;
  OccupancyGrid occ(tape, oc);
  // hand-mark a slab: only cells with z-index 2 occupied
  double* cache = tape.seg_values(tape.find("occupancy.cache"));
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x)
        cache[(static_cast<size_t>(z) * 4 + y) * 4 + x] = z == 2 ? 1.0 : 0.0;
  cache[64] = 1.0;  // one completed sweep: past the (zero) warm-up
  occ.refresh_bits();

  RenderOptions opt;
  for (int a = 0; a < 3; ++a) {
    opt.aabb_lo[a] = 0.0;
    opt.aabb_hi[a] = 4.0;
  }
  opt.near = 0.0;
  opt.far = 100.0;
  opt.march_steps = 64;
  opt.occ = &occ;

  Ray ray;
  ray.origin[0] = 2.0;
  ray.origin[1] = 2.0;
  ray.origin[2] = -1.0;
  ray.dir[0] = 0.0;
  ray.dir[1] = 0.0;
  ray.dir[2] = 1.0;
  double u0, u1;
  REQUIRE(clip_ray(ray, opt, &u0, &u1));
  std::vector<SamplePoint> pts;
  march_ray(ray, u0, u1, opt, pts);
  // the box spans z in [0,4); the occupied slab is z in [2,3): a quarter
  CHECK(pts.size() == 16);
  for (const SamplePoint& s : pts) {
    double z = ray.origin[2] + s.u * ray.dir[2];
    CHECK(z >= 2.0);
    CHECK(z <= 3.0);
  }

  // threshold zero marks everything: nothing may be skipped
  OccupancyConfig oc0;
  oc0.res = 4;
  oc0.threshold = 0.0;
  oc0.warmup_sweeps = 0;
  Tape tape0;
  OccupancyGrid occ0(tape0, oc0);
  double* c0 = tape0.seg_values(tape0.find("occupancy.cache"));
  for (int i = 0; i < 64; ++i) c0[i] = 1e-300;  // positive but tiny
  c0[64] = 1.0;
  occ0.refresh_bits();
  opt.occ = &occ0;
  march_ray(ray, u0, u1, opt, pts);
  CHECK(pts.size() == 64);
}
