#include "tinerf/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace tinerf {

double focal_from_angle(double camera_angle_x, int width) {
  return 0.5 * static_cast<double>(width) / std::tan(0.5 * camera_angle_x);
}

namespace {

inline void cross(const double a[3], const double b[3], double o[3]) {
  o[0] = a[1] * b[2] - a[2] * b[1];
  o[1] = a[2] * b[0] - a[0] * b[2];
  o[2] = a[0] * b[1] - a[1] * b[0];
}

inline double norm3(const double a[3]) {
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

inline void normalize3(double a[3]) {
  double n = norm3(a);
  if (n == 0.0) throw std::runtime_error("cannot normalize zero vector");
  a[0] /= n;
  a[1] /= n;
  a[2] /= n;
}

}  // namespace

void lookat_pose(const double eye[3], const double target[3],
                 const double world_up[3], double c2w[12]) {
  double back[3] = {eye[0] - target[0], eye[1] - target[1], eye[2] - target[2]};
  if (norm3(back) < 1e-12) throw std::runtime_error("look-at: eye equals target");
  normalize3(back);  // camera +z points away from the target
  double right[3];
  cross(world_up, back, right);
  if (norm3(right) < 1e-9) throw std::runtime_error("look-at: up parallel to view");
  normalize3(right);
  double up[3];
  cross(back, right, up);
  // columns of R are the camera axes expressed in world coordinates
  for (int r = 0; r < 3; ++r) {
    c2w[4 * r + 0] = right[r];
    c2w[4 * r + 1] = up[r];
    c2w[4 * r + 2] = back[r];
    c2w[4 * r + 3] = eye[r];
  }
}

bool pose_is_rigid(const double c2w[12]) {
  // gram matrix of the rotation block vs identity
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int r = 0; r < 3; ++r) dot += c2w[4 * r + i] * c2w[4 * r + j];
      double want = i == j ? 1.0 : 0.0;
      if (std::fabs(dot - want) > 1e-6) return false;
    }
  }
  double det =
      c2w[0] * (c2w[5] * c2w[10] - c2w[6] * c2w[9]) -
      c2w[1] * (c2w[4] * c2w[10] - c2w[6] * c2w[8]) +
      c2w[2] * (c2w[4] * c2w[9] - c2w[5] * c2w[8]);
  return std::fabs(det - 1.0) < 1e-6;
}

Ray make_ray(const Camera& cam, int px, int py) {
  double cx = 0.5 * static_cast<double>(cam.width);
  double cy = 0.5 * static_cast<double>(cam.height);
  double dx = (static_cast<double>(px) + 0.5 - cx) / cam.focal;
  double dy = -((static_cast<double>(py) + 0.5 - cy) / cam.focal);
  double dz = -1.0;
  double n = std::sqrt(dx * dx + dy * dy + dz * dz);
  double dc[3] = {dx / n, dy / n, dz / n};

  Ray r;
  for (int i = 0; i < 3; ++i) {
    r.origin[i] = cam.c2w[4 * i + 3];
    r.dir[i] = cam.c2w[4 * i + 0] * dc[0] + cam.c2w[4 * i + 1] * dc[1] +
               cam.c2w[4 * i + 2] * dc[2];
  }
  r.pixel = py * cam.width + px;
  return r;
}

bool ray_aabb(const double o[3], const double d[3], const double lo[3],
              const double hi[3], double* u0, double* u1) {
  double t0 = 0.0, t1 = 1e30;
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(d[a]) < 1e-15) {
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    double inv = 1.0 / d[a];
    double ta = (lo[a] - o[a]) * inv;
    double tb = (hi[a] - o[a]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return false;
  *u0 = t0;
  *u1 = t1;
  return true;
}

}  // namespace tinerf
