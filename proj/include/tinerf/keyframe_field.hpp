#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "tinerf/dense.hpp"
#include "tinerf/graph.hpp"
#include "tinerf/tape.hpp"

// Neural feature representation: a static MLP plus multi-level banks of
// keyframe MLPs whose outputs are linearly interpolated in time. Every
// feature MLP has one hidden layer with hidden size equal to its output dim.

namespace tinerf {

struct KeyframeBankConfig {
  int levels = 2;
  std::vector<int> slots = {5, 20};  // n_l: keyframes per level are n_l + 1
  std::vector<int> dims = {64, 64};  // per-level dynamic feature dims
  int static_dim = 128;
  int embed_dim = 8;
  int posenc_x_bands = 8;
  int posenc_z_bands = 3;

  void validate() const;
  int dynamic_dim() const {
    int d = 0;
    for (int v : dims) d += v;
    return d;
  }
};

// (i, dt) of Eq.-style keyframe interpolation: i = min(floor(t*n), n-1),
// dt = (i+1) - t*n, so dt = 1 exactly on keyframe i and 0 on keyframe i+1.
struct KeyframeWeights {
  int i = 0;
  double dt = 1.0;
};
KeyframeWeights keyframe_weights(double t, int n, std::atomic<uint64_t>* clamp_flag);

class KeyframeBank {
 public:
  KeyframeBank(Tape& tape, const KeyframeBankConfig& cfg, int n_frames,
               const std::string& prefix);

  void init_params(Tape& tape, uint64_t seed) const;

  const KeyframeBankConfig& config() const { return cfg_; }
  int n_frames() const { return n_frames_; }
  int embed_segment() const { return z_seg_; }

  // --- graph path (training) ---
  // Positionally-encoded x node, reusable across the feature MLPs of a sample.
  int posenc_x_node(Graph& g, const double x[3], double alpha_x) const;
  int posenc_z_node(Graph& g, int frame, double alpha_z) const;
  int static_node(Graph& g, int enc_x) const;
  // Full multi-level dynamic feature at (x, z_frame, t).
  int dynamic_node(Graph& g, int enc_x, int enc_z, double t) const;

  // --- raw path (evaluation; bit-identical kernels) ---
  void static_raw(const Tape& tape, const double x[3], double alpha_x,
                  double* out) const;
  void dynamic_raw(const Tape& tape, const double x[3], int frame, double t,
                   double alpha_x, double alpha_z, double* out) const;

  // Evaluation-time feature for an unseen time between adjacent training
  // frames a, b: blend of the two frames' dynamic features with weight
  // (t_b - t)/(t_b - t_a) on frame a. Rejects non-adjacent frames.
  void dynamic_raw_time_blend(const Tape& tape, const double x[3], int frame_a,
                              int frame_b, double t_a, double t_b, double t,
                              double alpha_x, double alpha_z, double* out) const;

  uint64_t clamp_count() const { return clamps_.load(std::memory_order_relaxed); }

  // exposed for targeted tests
  const Dense& phi(int level, int keyframe, int layer) const;
  const Dense& phi_static(int layer) const { return phi_s_[static_cast<size_t>(layer)]; }

 private:
  int phi_node(Graph& g, const Dense& l0, const Dense& l1, int enc_x, int enc_z) const;
  void phi_raw(const Tape& tape, const Dense& l0, const Dense& l1, const double* in,
               double* out, double* scratch) const;

  KeyframeBankConfig cfg_;
  int n_frames_ = 0;
  int z_seg_ = -1;
  int posenc_x_dim_ = 0, posenc_z_dim_ = 0;
  std::vector<Dense> phi_s_;                     // [2]: hidden, out
  std::vector<std::vector<Dense>> phi_;          // [level][ (n_l+1)*2 ]
  mutable std::atomic<uint64_t> clamps_{0};
};

}  // namespace tinerf
