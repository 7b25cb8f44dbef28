#include "tinerf/keyframe_field.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace tinerf {

void KeyframeBankConfig::validate() const {
  if (levels < 1) throw std::runtime_error("keyframe bank: levels must be >= 1");
  if (static_cast<int>(slots.size()) != levels ||
      static_cast<int>(dims.size()) != levels)
    throw std::runtime_error("keyframe bank: slots/dims must have one entry per level");
  for (int n : slots)
    if (n < 1) throw std::runtime_error("keyframe bank: slot count must be >= 1");
  for (int d : dims)
    if (d < 1) throw std::runtime_error("keyframe bank: feature dim must be >= 1");
  if (static_dim < 0) throw std::runtime_error("keyframe bank: static_dim >= 0");
  if (embed_dim < 1) throw std::runtime_error("keyframe bank: embed_dim >= 1");
}

KeyframeWeights keyframe_weights(double t, int n, std::atomic<uint64_t>* clamp_flag) {
  if (t < 0.0 || t > 1.0) {
    if (clamp_flag) clamp_flag->fetch_add(1, std::memory_order_relaxed);
    t = t < 0.0 ? 0.0 : 1.0;
  }
  double s = t * static_cast<double>(n);
  int i = static_cast<int>(std::floor(s));
  if (i > n - 1) i = n - 1;
  KeyframeWeights kw;
  kw.i = i;
  kw.dt = static_cast<double>(i + 1) - s;  // (t_{i+1} - t) / (t_{i+1} - t_i)
  return kw;
}

KeyframeBank::KeyframeBank(Tape& tape, const KeyframeBankConfig& cfg, int n_frames,
                           const std::string& prefix)
    : cfg_(cfg), n_frames_(n_frames) {
  cfg_.validate();
  if (n_frames < 1) throw std::runtime_error("keyframe bank: need at least one frame");
  posenc_x_dim_ = kernels::posenc_dim(3, cfg_.posenc_x_bands);
  posenc_z_dim_ = kernels::posenc_dim(cfg_.embed_dim, cfg_.posenc_z_bands);

  z_seg_ = tape.add_segment(prefix + ".z",
                            static_cast<size_t>(n_frames) *
                                static_cast<size_t>(cfg_.embed_dim),
                            static_cast<uint32_t>(cfg_.embed_dim),
                            ParamClass::embedding);

  if (cfg_.static_dim > 0) {
    phi_s_.push_back(Dense::create(tape, prefix + ".phi_s.layer0", posenc_x_dim_,
                                   cfg_.static_dim));
    phi_s_.push_back(Dense::create(tape, prefix + ".phi_s.layer1", cfg_.static_dim,
                                   cfg_.static_dim));
  }

  int phi_in = posenc_x_dim_ + posenc_z_dim_;
  phi_.resize(static_cast<size_t>(cfg_.levels));
  for (int l = 0; l < cfg_.levels; ++l) {
    int dim = cfg_.dims[static_cast<size_t>(l)];
    int n_mlp = cfg_.slots[static_cast<size_t>(l)] + 1;
    auto& vec = phi_[static_cast<size_t>(l)];
    for (int k = 0; k < n_mlp; ++k) {
      std::string base =
          prefix + ".phi.l" + std::to_string(l) + ".k" + std::to_string(k);
      vec.push_back(Dense::create(tape, base + ".layer0", phi_in, dim));
      vec.push_back(Dense::create(tape, base + ".layer1", dim, dim));
    }
  }
}

void KeyframeBank::init_params(Tape& tape, uint64_t seed) const {
  // z_t embeddings start at zero: frames are indistinguishable until trained.
  uint64_t salt = 0x6b6579ull;  // 'key'
  Rng srng(seed, RngStream::param_init, salt, 0);
  for (const auto& d : phi_s_) d.init_kaiming(tape, srng);
  for (size_t l = 0; l < phi_.size(); ++l) {
    Rng rng(seed, RngStream::param_init, salt, 1 + l);
    for (const auto& d : phi_[l]) d.init_kaiming(tape, rng);
  }
}

const Dense& KeyframeBank::phi(int level, int keyframe, int layer) const {
  return phi_[static_cast<size_t>(level)]
             [static_cast<size_t>(keyframe) * 2 + static_cast<size_t>(layer)];
}

int KeyframeBank::posenc_x_node(Graph& g, const double x[3], double alpha_x) const {
  int c = g.constant(x, 3);
  return g.posenc(c, cfg_.posenc_x_bands, alpha_x);
}

int KeyframeBank::posenc_z_node(Graph& g, int frame, double alpha_z) const {
  if (frame < 0 || frame >= n_frames_)
    throw std::runtime_error("keyframe bank: frame index out of range");
  uint32_t row = static_cast<uint32_t>(frame);
  double one = 1.0;
  int z = g.gather(z_seg_, &row, &one, 1);
  return g.posenc(z, cfg_.posenc_z_bands, alpha_z);
}

int KeyframeBank::phi_node(Graph& g, const Dense& l0, const Dense& l1, int enc_x,
                           int enc_z) const {
  int in = g.concat({enc_x, enc_z});
  return l1.node(g, g.relu(l0.node(g, in)));
}

int KeyframeBank::static_node(Graph& g, int enc_x) const {
  if (phi_s_.empty()) throw std::runtime_error("keyframe bank: no static MLP");
  return phi_s_[1].node(g, g.relu(phi_s_[0].node(g, enc_x)));
}

int KeyframeBank::dynamic_node(Graph& g, int enc_x, int enc_z, double t) const {
  std::vector<int> parts;
  parts.reserve(phi_.size());
  for (int l = 0; l < cfg_.levels; ++l) {
    KeyframeWeights kw = keyframe_weights(t, cfg_.slots[static_cast<size_t>(l)],
                                          &clamps_);
    int a = phi_node(g, phi(l, kw.i, 0), phi(l, kw.i, 1), enc_x, enc_z);
    int b = phi_node(g, phi(l, kw.i + 1, 0), phi(l, kw.i + 1, 1), enc_x, enc_z);
    parts.push_back(g.blend(kw.dt, a, 1.0 - kw.dt, b));
  }
  return g.concat(parts.data(), static_cast<int>(parts.size()));
}

void KeyframeBank::phi_raw(const Tape& tape, const Dense& l0, const Dense& l1,
                           const double* in, double* out, double* scratch) const {
  l0.raw(tape, in, scratch);
  kernels::relu(scratch, l0.out, scratch);
  l1.raw(tape, scratch, out);
}

void KeyframeBank::static_raw(const Tape& tape, const double x[3], double alpha_x,
                              double* out) const {
  if (phi_s_.empty()) throw std::runtime_error("keyframe bank: no static MLP");
  static thread_local std::vector<double> enc, scratch;
  enc.resize(static_cast<size_t>(posenc_x_dim_));
  scratch.resize(static_cast<size_t>(cfg_.static_dim));
  kernels::posenc(x, 3, cfg_.posenc_x_bands, alpha_x, enc.data());
  phi_raw(tape, phi_s_[0], phi_s_[1], enc.data(), out, scratch.data());
}

void KeyframeBank::dynamic_raw(const Tape& tape, const double x[3], int frame,
                               double t, double alpha_x, double alpha_z,
                               double* out) const {
  if (frame < 0 || frame >= n_frames_)
    throw std::runtime_error("keyframe bank: frame index out of range");
  size_t in_dim = static_cast<size_t>(posenc_x_dim_ + posenc_z_dim_);
  static thread_local std::vector<double> in, fa, fb, scratch;
  in.resize(in_dim);
  kernels::posenc(x, 3, cfg_.posenc_x_bands, alpha_x, in.data());
  const double* z = tape.seg_values(z_seg_) +
                    static_cast<size_t>(frame) * static_cast<size_t>(cfg_.embed_dim);
  kernels::posenc(z, cfg_.embed_dim, cfg_.posenc_z_bands, alpha_z,
                  in.data() + posenc_x_dim_);

  int max_dim = 0;
  for (int d : cfg_.dims) max_dim = std::max(max_dim, d);
  fa.resize(static_cast<size_t>(max_dim));
  fb.resize(static_cast<size_t>(max_dim));
  scratch.resize(static_cast<size_t>(max_dim));

  double* o = out;
  for (int l = 0; l < cfg_.levels; ++l) {
    int dim = cfg_.dims[static_cast<size_t>(l)];
    KeyframeWeights kw = keyframe_weights(t, cfg_.slots[static_cast<size_t>(l)],
                                          &clamps_);
    phi_raw(tape, phi(l, kw.i, 0), phi(l, kw.i, 1), in.data(), fa.data(),
            scratch.data());
    phi_raw(tape, phi(l, kw.i + 1, 0), phi(l, kw.i + 1, 1), in.data(), fb.data(),
            scratch.data());
    for (int d = 0; d < dim; ++d) o[d] = kw.dt * fa[d] + (1.0 - kw.dt) * fb[d];
    o += dim;
  }
}

void KeyframeBank::dynamic_raw_time_blend(const Tape& tape, const double x[3],
                                          int frame_a, int frame_b, double t_a,
                                          double t_b, double t, double alpha_x,
                                          double alpha_z, double* out) const {
  if (frame_b != frame_a + 1)
    throw std::runtime_error("time blend requires adjacent training frames");
  if (!(t_a <= t && t <= t_b) || !(t_a < t_b))
    throw std::runtime_error("time blend: t outside [t_a, t_b]");
  int dim = cfg_.dynamic_dim();
  static thread_local std::vector<double> fb;  // distinct from dynamic_raw's buffers
  fb.resize(static_cast<size_t>(dim));
  dynamic_raw(tape, x, frame_a, t_a, alpha_x, alpha_z, out);
  dynamic_raw(tape, x, frame_b, t_b, alpha_x, alpha_z, fb.data());
  double w = (t_b - t) / (t_b - t_a);
  for (int d = 0; d < dim; ++d) out[d] = w * out[d] + (1.0 - w) * fb[d];
}

}  // namespace tinerf
