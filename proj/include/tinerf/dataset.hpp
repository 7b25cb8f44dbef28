#pragma once

#include <string>
#include <vector>

#include "tinerf/camera.hpp"
#include "tinerf/field.hpp"
#include "tinerf/image.hpp"

// D-NeRF-style dataset layout: a transforms_<split>.json holding
// camera_angle_x and per-frame {file_path, time, transform_matrix}, with PNG
// frames alongside. Optional extension keys "aabb", "near", "far" carry the
// scene bounds our synthetic writer knows exactly.

namespace tinerf {

struct DatasetFrame {
  std::string file_path;  // as written in the transforms file
  double time = 0.0;
  double c2w[12] = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  Image image;  // RGBA straight-alpha or plain RGB, values in [0,1]
};

struct SceneDataset {
  std::string split;
  int width = 0;
  int height = 0;
  double camera_angle_x = 0.0;
  double focal = 0.0;
  double aabb_lo[3] = {-1.5, -1.5, -1.5};
  double aabb_hi[3] = {1.5, 1.5, 1.5};
  double near_clip = 0.0;
  double far_clip = 1e30;
  std::vector<DatasetFrame> frames;  // ascending time (stable on ties)

  int n_frames() const { return static_cast<int>(frames.size()); }
  Camera camera(int frame) const;
};

// Loads <root>/transforms_<split>.json plus the referenced images. Times come
// from the "time" fields when present (all-or-nothing), else frame_index /
// (n-1); frames are stably sorted by time. Malformed poses, missing images,
// and out-of-range times fail with errors naming the file and frame.
SceneDataset load_dataset(const std::string& root, const std::string& split);

// Writes <root>/transforms_<split>.json and the referenced PNGs; poses and
// times survive a load round-trip exactly.
void save_dataset(const SceneDataset& ds, const std::string& root);

// Bracketing time context for a query at time t. Exact frame hits (within
// 1e-12) and the grid representation yield single-frame contexts; otherwise
// the two bracketing frames blend their features. t outside the covered range
// clamps to the nearest end frame.
TimeContext time_context(const SceneDataset& ds, double t, Representation rep);

}  // namespace tinerf
