#include "tinerf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "tinerf/kernels.hpp"

namespace tinerf {

namespace {

constexpr double kPi = 3.14159265358979323846;

double smoothstep01(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

// Signed distance to an axis box (exact outside faces, negative inside).
double box_dist(const double x[3], const double lo[3], const double hi[3]) {
  double d = -1e30;
  for (int a = 0; a < 3; ++a) {
    double da = std::max(lo[a] - x[a], x[a] - hi[a]);
    d = std::max(d, da);
  }
  return d;
}

// Smooth box density: full `amp` at `edge` inside the surface, 0 outside.
double box_density(const double x[3], const double lo[3], const double hi[3],
                   double amp, double edge) {
  return amp * smoothstep01(-box_dist(x, lo, hi) / edge);
}

struct Slab {
  double lo[3] = {-1.2, -1.2, -1.2};
  double hi[3] = {1.2, 1.2, -0.9};
  double sigma(const double x[3]) const { return box_density(x, lo, hi, 25.0, 0.08); }
  void color(const double x[3], double rgb[3]) const {
    double s = std::sin(kPi * x[0] / 0.3) * std::sin(kPi * x[1] / 0.3);
    double m = 0.5 * (1.0 + std::tanh(4.0 * s));
    const double c1[3] = {0.82, 0.30, 0.22};
    const double c2[3] = {0.92, 0.88, 0.80};
    for (int c = 0; c < 3; ++c) rgb[c] = m * c1[c] + (1.0 - m) * c2[c];
  }
};

struct Blob {
  double radius = 0.35;
  double amp = 30.0;
  void center(double t, double p[3]) const {
    double s = 2.0 * t - 1.0;
    p[0] = -0.55 + 1.1 * t;
    p[1] = 0.0;
    p[2] = -0.55 + 1.0 * (1.0 - s * s);  // touches the slab at t = 0 and 1
  }
  double sigma(const double x[3], double t) const {
    double p[3];
    center(t, p);
    double r = std::sqrt((x[0] - p[0]) * (x[0] - p[0]) +
                         (x[1] - p[1]) * (x[1] - p[1]) +
                         (x[2] - p[2]) * (x[2] - p[2]));
    return amp * smoothstep01((radius - r) / 0.10);
  }
  void color(const double x[3], double t, double rgb[3]) const {
    double p[3];
    center(t, p);
    double r = std::sqrt((x[0] - p[0]) * (x[0] - p[0]) +
                         (x[1] - p[1]) * (x[1] - p[1]) +
                         (x[2] - p[2]) * (x[2] - p[2]));
    double q = std::min(r / radius, 1.0);
    rgb[0] = 1.0;
    rgb[1] = 0.55 + 0.30 * (1.0 - q);
    rgb[2] = 0.15 + 0.35 * (1.0 - q);
  }
};

void mix_by_density(int n, const double* sig, const double* cols, double* rgb) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += sig[i];
  if (total < 1e-12) {
    rgb[0] = rgb[1] = rgb[2] = 0.0;
    return;
  }
  for (int c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += sig[i] * cols[3 * i + c];
    rgb[c] = acc / total;
  }
}

AnalyticScene blob_bounce() {
  AnalyticScene sc;
  sc.name = "blob-bounce";
  Slab slab;
  Blob blob;
  sc.sigma = [slab, blob](const double x[3], double t) {
    return slab.sigma(x) + blob.sigma(x, t);
  };
  sc.color = [slab, blob](const double x[3], double t, double rgb[3]) {
    double sig[2], cols[6];
    sig[0] = slab.sigma(x);
    sig[1] = blob.sigma(x, t);
    slab.color(x, cols);
    blob.color(x, t, cols + 3);
    mix_by_density(2, sig, cols, rgb);
  };
  return sc;
}

struct TwinSpheres {
  double radius = 0.30;
  double amp = 28.0;
  double offset(double t) const { return 0.12 + 0.60 * (1.0 - std::sin(kPi * t)); }
  double one(const double x[3], double cx, double cz) const {
    double r = std::sqrt((x[0] - cx) * (x[0] - cx) + x[1] * x[1] +
                         (x[2] - cz) * (x[2] - cz));
    return amp * smoothstep01((radius - r) / 0.08);
  }
};

AnalyticScene split_merge() {
  AnalyticScene sc;
  sc.name = "split-merge";
  TwinSpheres tw;
  sc.sigma = [tw](const double x[3], double t) {
    double d = tw.offset(t);
    return tw.one(x, -d, 0.0) + tw.one(x, d, 0.0);
  };
  sc.color = [tw](const double x[3], double t, double rgb[3]) {
    double d = tw.offset(t);
    double sig[2] = {tw.one(x, -d, 0.0), tw.one(x, d, 0.0)};
    const double cols[6] = {0.20, 0.55, 0.95, 0.25, 0.90, 0.40};
    mix_by_density(2, sig, cols, rgb);
  };
  return sc;
}

AnalyticScene corner_flash() {
  AnalyticScene sc;
  sc.name = "corner-flash";
  for (int a = 0; a < 3; ++a) {
    sc.aabb_lo[a] = -1.6;
    sc.aabb_hi[a] = 1.6;
  }
  Slab slab;
  Blob blob;
  // pillar on the south edge, fully hidden behind the wall from the northern
  // training arc; only the az=270-degree flash frame (and test views) see it
  const double pil_lo[3] = {-0.22, -1.20, -0.90};
  const double pil_hi[3] = {0.22, -0.80, -0.35};
  const double wall_lo[3] = {-0.75, -0.72, -0.90};
  const double wall_hi[3] = {0.75, -0.64, 0.10};
  sc.sigma = [=](const double x[3], double t) {
    return slab.sigma(x) + blob.sigma(x, t) +
           box_density(x, pil_lo, pil_hi, 25.0, 0.06) +
           box_density(x, wall_lo, wall_hi, 25.0, 0.05);
  };
  sc.color = [=](const double x[3], double t, double rgb[3]) {
    double sig[4], cols[12];
    sig[0] = slab.sigma(x);
    sig[1] = blob.sigma(x, t);
    sig[2] = box_density(x, pil_lo, pil_hi, 25.0, 0.06);
    sig[3] = box_density(x, wall_lo, wall_hi, 25.0, 0.05);
    slab.color(x, cols);
    blob.color(x, t, cols + 3);
    double zf = (x[2] - pil_lo[2]) / (pil_hi[2] - pil_lo[2]);
    zf = std::clamp(zf, 0.0, 1.0);
    cols[6] = 0.85 * (0.8 + 0.2 * zf);
    cols[7] = 0.10 * (0.8 + 0.2 * zf);
    cols[8] = 0.16 * (0.8 + 0.2 * zf);
    cols[9] = 0.55;
    cols[10] = 0.55;
    cols[11] = 0.58;
    mix_by_density(4, sig, cols, rgb);
  };
  return sc;
}

}  // namespace

AnalyticScene make_scene(const std::string& name) {
  if (name == "blob-bounce") return blob_bounce();
  if (name == "split-merge") return split_merge();
  if (name == "corner-flash") return corner_flash();
  throw std::runtime_error("unknown synthetic scene: " + name);
}

Image render_oracle(const AnalyticScene& scene, const Camera& cam, double t,
                    int n_samples) {
  Image img(cam.width, cam.height, /*with_alpha=*/true);
  std::vector<double> sigma(static_cast<size_t>(n_samples)),
      rgb(static_cast<size_t>(n_samples) * 3), du(static_cast<size_t>(n_samples)),
      u(static_cast<size_t>(n_samples)), stash(static_cast<size_t>(n_samples) * 2);
  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      Ray ray = make_ray(cam, px, py);
      double u0, u1;
      size_t pi = static_cast<size_t>(py) * cam.width + px;
      if (!ray_aabb(ray.origin, ray.dir, scene.aabb_lo, scene.aabb_hi, &u0, &u1))
        continue;  // transparent black
      double step = (u1 - u0) / n_samples;
      for (int k = 0; k < n_samples; ++k) {
        double uk = u0 + (k + 0.5) * step;
        double x[3];
        for (int a = 0; a < 3; ++a) x[a] = ray.origin[a] + uk * ray.dir[a];
        sigma[static_cast<size_t>(k)] = scene.sigma(x, t);
        scene.color(x, t, &rgb[3 * static_cast<size_t>(k)]);
        du[static_cast<size_t>(k)] = step;
        u[static_cast<size_t>(k)] = uk;
      }
      double out5[5];
      kernels::composite_forward(sigma.data(), rgb.data(), du.data(), u.data(),
                                 n_samples, stash.data(), out5);
      double a = out5[4];
      img.alpha[pi] = a;
      // straight alpha; premultiplied C <= a per channel keeps this in [0,1]
      if (a > 1e-12)
        for (int c = 0; c < 3; ++c) img.rgb[3 * pi + c] = out5[c] / a;
    }
  }
  return img;
}

namespace {

Camera orbit_camera(int width, int height, double focal, double az_deg,
                    double el_deg, double radius) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.focal = focal;
  double az = az_deg * kPi / 180.0;
  double el = el_deg * kPi / 180.0;
  double eye[3] = {radius * std::cos(el) * std::cos(az),
                   radius * std::cos(el) * std::sin(az), radius * std::sin(el)};
  const double target[3] = {0.0, 0.0, 0.0};
  const double up[3] = {0.0, 0.0, 1.0};
  lookat_pose(eye, target, up, cam.c2w);
  return cam;
}

}  // namespace

void generate_dataset(const SynthConfig& cfg, const std::string& root) {
  if (cfg.n_frames < 2) throw std::runtime_error("synth: need at least 2 frames");
  for (int f : cfg.test_frames)
    if (f < 0 || f >= cfg.n_frames)
      throw std::runtime_error("synth: test frame index out of range");

  AnalyticScene scene = make_scene(cfg.scene);
  double fov = cfg.fov_deg * kPi / 180.0;
  double focal = focal_from_angle(fov, cfg.width);

  double half_diag = 0.0;
  for (int a = 0; a < 3; ++a) {
    double h = 0.5 * (scene.aabb_hi[a] - scene.aabb_lo[a]);
    half_diag += h * h;
  }
  half_diag = std::sqrt(half_diag);

  SceneDataset train, test;
  for (SceneDataset* ds : {&train, &test}) {
    ds->width = cfg.width;
    ds->height = cfg.height;
    ds->camera_angle_x = fov;
    ds->focal = focal;
    for (int a = 0; a < 3; ++a) {
      ds->aabb_lo[a] = scene.aabb_lo[a];
      ds->aabb_hi[a] = scene.aabb_hi[a];
    }
    ds->near_clip = std::max(0.05, cfg.orbit_radius - half_diag - 0.1);
    ds->far_clip = cfg.orbit_radius + half_diag + 0.1;
  }
  train.split = "train";
  test.split = "test";

  // camera schedule: evenly spaced azimuths, alternating elevation. The
  // corner-flash scene instead trains on a northern arc plus one southern
  // "flash" view (so the pillar region appears in exactly one training
  // frame) and holds out southern views that see that region.
  bool flash = cfg.scene == "corner-flash";
  int flash_index = cfg.n_frames / 3 + 1;
  if (flash && std::find(cfg.test_frames.begin(), cfg.test_frames.end(),
                         flash_index) != cfg.test_frames.end())
    throw std::runtime_error("synth: corner-flash test frames may not include "
                             "the flash frame (index " +
                             std::to_string(flash_index) + ")");
  int arc_i = 0, test_i = 0;
  int n_test = static_cast<int>(cfg.test_frames.size());
  int arc_n = cfg.n_frames - n_test - 1;
  for (int i = 0; i < cfg.n_frames; ++i) {
    bool is_test =
        std::find(cfg.test_frames.begin(), cfg.test_frames.end(), i) !=
        cfg.test_frames.end();
    double az, el = (i % 2 == 0) ? 18.0 : 30.0;
    if (flash) {
      if (is_test) {
        az = 230.0 + 80.0 * (n_test > 1 ? static_cast<double>(test_i) / (n_test - 1)
                                        : 0.5);
        ++test_i;
      } else if (i == flash_index) {
        az = 270.0;
      } else {
        az = 20.0 + 140.0 * (arc_n > 1 ? static_cast<double>(arc_i) / (arc_n - 1)
                                       : 0.5);
        ++arc_i;
      }
    } else {
      az = 360.0 * static_cast<double>(i) / cfg.n_frames;
    }
    double t = static_cast<double>(i) / (cfg.n_frames - 1);
    Camera cam = orbit_camera(cfg.width, cfg.height, focal, az, el,
                              cfg.orbit_radius);

    if (i == 0) {
      // quadrature convergence gate before trusting the oracle as GT
      Image a = render_oracle(scene, cam, t, cfg.oracle_samples);
      Image b = render_oracle(scene, cam, t, 2 * cfg.oracle_samples);
      double worst = 0.0;
      for (size_t k = 0; k < a.rgb.size(); ++k)
        worst = std::max(worst, std::fabs(a.rgb[k] - b.rgb[k]));
      for (size_t k = 0; k < a.alpha.size(); ++k)
        worst = std::max(worst, std::fabs(a.alpha[k] - b.alpha[k]));
      if (worst >= 1e-3)
        throw std::runtime_error(
            "synth: oracle not converged at n_samples, max delta " +
            std::to_string(worst));
    }

    SceneDataset& ds = is_test ? test : train;
    DatasetFrame df;
    df.time = t;
    std::copy(cam.c2w, cam.c2w + 12, df.c2w);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "./%s/r_%03d", ds.split.c_str(), i);
    df.file_path = buf;
    df.image = render_oracle(scene, cam, t, cfg.oracle_samples);
    ds.frames.push_back(std::move(df));
  }

  if (train.frames.empty() || test.frames.empty())
    throw std::runtime_error("synth: both splits must be nonempty");
  save_dataset(train, root);
  save_dataset(test, root);
}

}  // namespace tinerf
