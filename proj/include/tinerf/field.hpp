#pragma once

#include <memory>
#include <optional>

#include "tinerf/encoding.hpp"
#include "tinerf/graph.hpp"
#include "tinerf/hash_grid.hpp"
#include "tinerf/keyframe_field.hpp"
#include "tinerf/template_nerf.hpp"

// Complete radiance field: a feature representation (keyframe-MLP bank or
// space-time hash grid) feeding template NeRF heads. The neural path keeps
// two templates (coarse: stratified pass, fine: importance pass) over one
// shared feature representation; the grid path has a single template.

namespace tinerf {

enum class Representation { neural, grid };

struct ModelConfig {
  Representation rep = Representation::grid;
  HashGridConfig grid;
  KeyframeBankConfig bank;
  TemplateNerfConfig tmpl;
  double posenc_ramp_frac = 0.2;  // fraction of training over which the
                                  // frequency window opens (neural path)
};

// Time context of a field query. Training queries carry the source frame;
// evaluation at unseen times carries the bracketing adjacent frames, and the
// neural path blends the two frames' dynamic feature vectors.
struct TimeContext {
  double t = 0.0;
  int frame_a = -1;
  int frame_b = -1;  // -1: query exactly at frame_a
  double t_a = 0.0, t_b = 0.0;

  static TimeContext at_frame(int frame, double t) {
    TimeContext tc;
    tc.t = t;
    tc.frame_a = frame;
    tc.t_a = t;
    return tc;
  }
  static TimeContext between_frames(int fa, int fb, double ta, double tb, double t) {
    TimeContext tc;
    tc.t = t;
    tc.frame_a = fa;
    tc.frame_b = fb;
    tc.t_a = ta;
    tc.t_b = tb;
    return tc;
  }
};

class FieldModel {
 public:
  FieldModel(Tape& tape, const ModelConfig& cfg, int n_frames);

  void init_params(Tape& tape, uint64_t seed) const;

  Representation rep() const { return cfg_.rep; }
  const ModelConfig& config() const { return cfg_; }
  int feature_dim() const;
  const HashGridSet* grid() const { return grid_.get(); }
  const KeyframeBank* bank() const { return bank_.get(); }
  const TemplateNerf& tmpl(bool fine) const {
    return fine && tmpl_fine_ ? *tmpl_fine_ : *tmpl_;
  }

  struct SampleNodes {
    int sigma = -1;
    int rgb = -1;
    int vdyn = -1;   // dynamic feature node (neural path; smoothness hook)
    int enc_x = -1;  // encoded position node (neural path; reusable)
  };
  // Builds the per-sample training subgraph. enc_dir is a constant node of
  // the SH-encoded ray direction (shared across a ray's samples).
  SampleNodes sample_node(Graph& g, const double x[3], const TimeContext& tc,
                          int enc_dir, double alpha_x, double alpha_z,
                          bool fine) const;

  // No-grad evaluation through the same kernels. `fine` picks the template on
  // the neural path (ignored on the grid path).
  void point_raw(const Tape& tape, const double x[3], const TimeContext& tc,
                 const double sh_dir[kShDim], double alpha_x, double alpha_z,
                 double rgb[3], double* sigma, bool fine = true) const;
  // Density only (occupancy sweeps; grid path).
  double sigma_raw(const Tape& tape, const double x[3], double t, double alpha_x,
                   double alpha_z) const;
  // Raw feature vector (length feature_dim()); honors time-blend contexts.
  void features_raw(const Tape& tape, const double x[3], const TimeContext& tc,
                    double alpha_x, double alpha_z, double* out) const;

 private:
  void feature_raw(const Tape& tape, const double x[3], const TimeContext& tc,
                   double alpha_x, double alpha_z, double* out) const;

  ModelConfig cfg_;
  std::unique_ptr<HashGridSet> grid_;
  std::unique_ptr<KeyframeBank> bank_;
  std::unique_ptr<TemplateNerf> tmpl_;       // grid template / neural coarse
  std::unique_ptr<TemplateNerf> tmpl_fine_;  // neural fine
};

}  // namespace tinerf
