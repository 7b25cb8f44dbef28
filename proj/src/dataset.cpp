#include "tinerf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace tinerf {

namespace fs = std::filesystem;
using nlohmann::json;

Camera SceneDataset::camera(int frame) const {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.focal = focal;
  std::copy(std::begin(frames.at(static_cast<size_t>(frame)).c2w),
            std::end(frames.at(static_cast<size_t>(frame)).c2w), cam.c2w);
  return cam;
}

namespace {

std::string frame_tag(const std::string& file, size_t idx) {
  return file + ", frame " + std::to_string(idx);
}

void parse_pose(const json& frame, const std::string& tag, double c2w[12]) {
  if (!frame.contains("transform_matrix"))
    throw std::runtime_error(tag + ": missing transform_matrix");
  const json& m = frame["transform_matrix"];
  if (!m.is_array() || m.size() != 4)
    throw std::runtime_error(tag + ": transform_matrix must be 4 rows");
  for (size_t r = 0; r < 4; ++r) {
    const json& row = m[r];
    if (!row.is_array() || row.size() != 4)
      throw std::runtime_error(tag + ": transform_matrix row " +
                               std::to_string(r) + " must have 4 entries");
    if (r == 3) continue;  // bottom row ignored (assumed affine)
    for (size_t c = 0; c < 4; ++c) {
      if (!row[c].is_number())
        throw std::runtime_error(tag + ": non-numeric pose entry");
      c2w[4 * r + c] = row[c].get<double>();
    }
  }
  if (!pose_is_rigid(c2w))
    throw std::runtime_error(tag + ": rotation block not orthonormal (det +1)");
}

}  // namespace

SceneDataset load_dataset(const std::string& root, const std::string& split) {
  std::string tf = root + "/transforms_" + split + ".json";
  std::ifstream in(tf);
  if (!in) throw std::runtime_error("cannot open transforms file: " + tf);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(tf + ": " + e.what());
  }

  SceneDataset ds;
  ds.split = split;
  if (!doc.contains("camera_angle_x") || !doc["camera_angle_x"].is_number())
    throw std::runtime_error(tf + ": missing numeric camera_angle_x");
  ds.camera_angle_x = doc["camera_angle_x"].get<double>();

  if (doc.contains("aabb")) {
    const json& bb = doc["aabb"];
    if (!bb.is_array() || bb.size() != 2 || bb[0].size() != 3 || bb[1].size() != 3)
      throw std::runtime_error(tf + ": aabb must be [[lo3],[hi3]]");
    for (int a = 0; a < 3; ++a) {
      ds.aabb_lo[a] = bb[0][static_cast<size_t>(a)].get<double>();
      ds.aabb_hi[a] = bb[1][static_cast<size_t>(a)].get<double>();
      if (!(ds.aabb_lo[a] < ds.aabb_hi[a]))
        throw std::runtime_error(tf + ": aabb lo must be < hi per axis");
    }
  }
  if (doc.contains("near")) ds.near_clip = doc["near"].get<double>();
  if (doc.contains("far")) ds.far_clip = doc["far"].get<double>();

  if (!doc.contains("frames") || !doc["frames"].is_array() || doc["frames"].empty())
    throw std::runtime_error(tf + ": no frames");
  const json& frames = doc["frames"];

  size_t with_time = 0;
  for (const auto& f : frames)
    if (f.contains("time")) ++with_time;
  if (with_time != 0 && with_time != frames.size())
    throw std::runtime_error(tf + ": time fields must be on all frames or none");

  for (size_t i = 0; i < frames.size(); ++i) {
    const json& f = frames[i];
    std::string tag = frame_tag(tf, i);
    DatasetFrame df;
    if (!f.contains("file_path") || !f["file_path"].is_string())
      throw std::runtime_error(tag + ": missing file_path");
    df.file_path = f["file_path"].get<std::string>();
    parse_pose(f, tag, df.c2w);
    if (with_time) {
      df.time = f["time"].get<double>();
      if (!(df.time >= 0.0 && df.time <= 1.0))
        throw std::runtime_error(tag + ": time " + std::to_string(df.time) +
                                 " outside [0,1]");
    } else {
      df.time = frames.size() == 1 ? 0.0
                                   : static_cast<double>(i) /
                                         static_cast<double>(frames.size() - 1);
    }

    std::string rel = df.file_path;
    if (rel.rfind("./", 0) == 0) rel = rel.substr(2);
    std::string img_path = root + "/" + rel;
    if (img_path.size() < 4 || img_path.substr(img_path.size() - 4) != ".png")
      img_path += ".png";
    if (!fs::exists(img_path))
      throw std::runtime_error(tag + ": image not found: " + img_path);
    df.image = load_png(img_path);

    if (ds.width == 0) {
      ds.width = df.image.width;
      ds.height = df.image.height;
    } else if (df.image.width != ds.width || df.image.height != ds.height) {
      throw std::runtime_error(tag + ": image size " +
                               std::to_string(df.image.width) + "x" +
                               std::to_string(df.image.height) +
                               " differs from first frame");
    }
    ds.frames.push_back(std::move(df));
  }

  ds.focal = focal_from_angle(ds.camera_angle_x, ds.width);
  std::stable_sort(ds.frames.begin(), ds.frames.end(),
                   [](const DatasetFrame& a, const DatasetFrame& b) {
                     return a.time < b.time;
                   });
  return ds;
}

void save_dataset(const SceneDataset& ds, const std::string& root) {
  fs::create_directories(root + "/" + ds.split);
  json doc;
  doc["camera_angle_x"] = ds.camera_angle_x;
  doc["aabb"] = {{ds.aabb_lo[0], ds.aabb_lo[1], ds.aabb_lo[2]},
                 {ds.aabb_hi[0], ds.aabb_hi[1], ds.aabb_hi[2]}};
  if (ds.near_clip > 0.0) doc["near"] = ds.near_clip;
  if (ds.far_clip < 1e30) doc["far"] = ds.far_clip;
  json frames = json::array();
  for (size_t i = 0; i < ds.frames.size(); ++i) {
    const DatasetFrame& df = ds.frames[i];
    json f;
    f["file_path"] = df.file_path;
    f["time"] = df.time;
    json m = json::array();
    for (int r = 0; r < 3; ++r)
      m.push_back({df.c2w[4 * r + 0], df.c2w[4 * r + 1], df.c2w[4 * r + 2],
                   df.c2w[4 * r + 3]});
    m.push_back({0.0, 0.0, 0.0, 1.0});
    f["transform_matrix"] = m;
    frames.push_back(f);

    std::string rel = df.file_path;
    if (rel.rfind("./", 0) == 0) rel = rel.substr(2);
    std::string img_path = root + "/" + rel;
    if (img_path.size() < 4 || img_path.substr(img_path.size() - 4) != ".png")
      img_path += ".png";
    write_png(df.image, img_path);
  }
  doc["frames"] = frames;
  std::ofstream out(root + "/transforms_" + ds.split + ".json");
  if (!out)
    throw std::runtime_error("cannot write transforms file under: " + root);
  out << doc.dump(2) << "\n";
}

TimeContext time_context(const SceneDataset& ds, double t, Representation rep) {
  if (ds.frames.empty()) throw std::runtime_error("time_context: empty dataset");
  int n = ds.n_frames();
  // nearest frame (times are sorted)
  int nearest = 0;
  double best = std::fabs(ds.frames[0].time - t);
  for (int i = 1; i < n; ++i) {
    double d = std::fabs(ds.frames[static_cast<size_t>(i)].time - t);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  if (rep == Representation::grid || best <= 1e-12)
    return TimeContext::at_frame(nearest, rep == Representation::grid
                                              ? t
                                              : ds.frames[static_cast<size_t>(nearest)].time);
  if (t <= ds.frames[0].time) return TimeContext::at_frame(0, ds.frames[0].time);
  if (t >= ds.frames[static_cast<size_t>(n - 1)].time)
    return TimeContext::at_frame(n - 1, ds.frames[static_cast<size_t>(n - 1)].time);
  int lo = 0;
  while (lo + 1 < n && ds.frames[static_cast<size_t>(lo + 1)].time <= t) ++lo;
  return TimeContext::between_frames(lo, lo + 1, ds.frames[static_cast<size_t>(lo)].time,
                                     ds.frames[static_cast<size_t>(lo + 1)].time, t);
}

}  // namespace tinerf
