#pragma once

#include <cstdint>

// Pinhole cameras and rays. Convention: camera looks down its local -z axis,
// +x right, +y up; a pixel's ray passes through the pixel center, so the
// principal-point pixel of an identity-pose camera maps to direction (0,0,-1).

namespace tinerf {

struct Camera {
  int width = 0;
  int height = 0;
  double focal = 0.0;  // pixels
  double c2w[12] = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};  // 3x4 row-major [R|t]
};

struct Ray {
  double origin[3];
  double dir[3];  // unit
  double u_near = 0.0, u_far = 0.0;
  double t = 0.0;  // normalized time of the source frame
  int frame = -1;
  int pixel = -1;  // py * width + px
};

// focal = 0.5 * width / tan(0.5 * camera_angle_x)
double focal_from_angle(double camera_angle_x, int width);

// Right-handed look-at pose: camera at eye, -z toward target, up approximately
// world_up. Fails (throws) when eye == target or up parallel to view axis.
void lookat_pose(const double eye[3], const double target[3], const double world_up[3],
                 double c2w[12]);

// Checks the rotation block is orthonormal with det ~= +1 (tolerance 1e-6).
bool pose_is_rigid(const double c2w[12]);

// Ray through pixel center (px, py). Bounds are left at (0,0); callers clip
// against the scene box / near / far.
Ray make_ray(const Camera& cam, int px, int py);

// Slab intersection of [o + u d] with the axis box [lo, hi]; returns false on
// miss, else u0 <= u1 with u0 clamped to >= 0.
bool ray_aabb(const double o[3], const double d[3], const double lo[3],
              const double hi[3], double* u0, double* u1);

}  // namespace tinerf
