#include "tinerf/template_nerf.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace tinerf {

void TemplateNerfConfig::validate() const {
  if (layers < 1) throw std::runtime_error("template: layers must be >= 1");
  if (hidden < 1 || color_hidden < 1)
    throw std::runtime_error("template: hidden sizes must be >= 1");
  if (skip_layer >= layers)
    throw std::runtime_error("template: skip_layer out of range");
}

TemplateNerf::TemplateNerf(Tape& tape, const TemplateNerfConfig& cfg,
                           int feature_dim, int dir_dim, const std::string& prefix)
    : cfg_(cfg), feature_dim_(feature_dim), dir_dim_(dir_dim) {
  cfg_.validate();
  for (int l = 0; l < cfg_.layers; ++l) {
    int in = l == 0 ? feature_dim : cfg_.hidden;
    if (l == cfg_.skip_layer && l > 0) in = cfg_.hidden + feature_dim;
    trunk_.push_back(
        Dense::create(tape, prefix + ".trunk" + std::to_string(l), in, cfg_.hidden));
  }
  sigma_head_ = Dense::create(tape, prefix + ".sigma", cfg_.hidden, 1);
  color0_ = Dense::create(tape, prefix + ".color0", cfg_.hidden + dir_dim,
                          cfg_.color_hidden);
  color1_ = Dense::create(tape, prefix + ".color1", cfg_.color_hidden, 3);
}

void TemplateNerf::init_params(Tape& tape, uint64_t seed) const {
  Rng rng(seed, RngStream::param_init, 0x746d706cull /* 'tmpl' */, 0);
  for (const auto& d : trunk_) d.init_kaiming(tape, rng);
  sigma_head_.init_kaiming(tape, rng);
  color0_.init_kaiming(tape, rng);
  color1_.init_kaiming(tape, rng);
  // Start near-transparent so empty space clears fast under the initial loss.
  tape.seg_values(sigma_head_.b_seg)[0] = cfg_.density_bias;
}

int TemplateNerf::trunk_node(Graph& g, int feature) const {
  int h = feature;
  for (int l = 0; l < cfg_.layers; ++l) {
    if (l == cfg_.skip_layer && l > 0) h = g.concat({h, feature});
    h = g.relu(trunk_[static_cast<size_t>(l)].node(g, h));
  }
  return h;
}

TemplateNerf::EvalNodes TemplateNerf::eval_node(Graph& g, int feature,
                                                int enc_dir) const {
  if (g.dim(enc_dir) != dir_dim_)
    throw std::runtime_error("template: direction encoding dim mismatch");
  int h = trunk_node(g, feature);
  EvalNodes out;
  out.sigma = g.softplus(sigma_head_.node(g, h));
  int cin = g.concat({h, enc_dir});
  out.rgb = g.sigmoid(color1_.node(g, g.relu(color0_.node(g, cin))));
  return out;
}

int TemplateNerf::sigma_node(Graph& g, int feature) const {
  return g.softplus(sigma_head_.node(g, trunk_node(g, feature)));
}

void TemplateNerf::trunk_raw(const Tape& tape, const double* feature, double* h,
                             double* scratch) const {
  // scratch must hold hidden + feature_dim doubles. The affine kernel cannot
  // read and write the same buffer, so layers past the first stage their
  // input through scratch.
  const double* cur = feature;
  for (int l = 0; l < cfg_.layers; ++l) {
    const Dense& d = trunk_[static_cast<size_t>(l)];
    if (l == cfg_.skip_layer && l > 0) {
      std::copy(cur, cur + cfg_.hidden, scratch);
      std::copy(feature, feature + feature_dim_, scratch + cfg_.hidden);
      d.raw(tape, scratch, h);
    } else if (l > 0) {
      std::copy(cur, cur + cfg_.hidden, scratch);
      d.raw(tape, scratch, h);
    } else {
      d.raw(tape, cur, h);
    }
    kernels::relu(h, cfg_.hidden, h);
    cur = h;
  }
}

void TemplateNerf::eval_raw(const Tape& tape, const double* feature,
                            const double* enc_dir, double* rgb, double* sigma) const {
  // hot path (one call per ray sample): reuse per-thread scratch
  static thread_local std::vector<double> h, scratch, c;
  h.resize(static_cast<size_t>(cfg_.hidden));
  scratch.resize(static_cast<size_t>(
      std::max(cfg_.hidden + feature_dim_, cfg_.hidden + dir_dim_)));
  c.resize(static_cast<size_t>(cfg_.color_hidden));
  trunk_raw(tape, feature, h.data(), scratch.data());
  double pre;
  sigma_head_.raw(tape, h.data(), &pre);
  kernels::softplus(&pre, 1, sigma);

  std::copy(h.begin(), h.end(), scratch.begin());
  std::copy(enc_dir, enc_dir + dir_dim_, scratch.begin() + cfg_.hidden);
  color0_.raw(tape, scratch.data(), c.data());
  kernels::relu(c.data(), cfg_.color_hidden, c.data());
  double pre_rgb[3];
  color1_.raw(tape, c.data(), pre_rgb);
  kernels::sigmoid(pre_rgb, 3, rgb);
}

double TemplateNerf::sigma_raw(const Tape& tape, const double* feature) const {
  static thread_local std::vector<double> h, scratch;
  h.resize(static_cast<size_t>(cfg_.hidden));
  scratch.resize(static_cast<size_t>(cfg_.hidden + feature_dim_));
  trunk_raw(tape, feature, h.data(), scratch.data());
  double pre, sigma;
  sigma_head_.raw(tape, h.data(), &pre);
  kernels::softplus(&pre, 1, &sigma);
  return sigma;
}

}  // namespace tinerf
