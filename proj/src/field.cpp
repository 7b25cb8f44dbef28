#include "tinerf/field.hpp"

#include <stdexcept>
#include <vector>

namespace tinerf {

FieldModel::FieldModel(Tape& tape, const ModelConfig& cfg, int n_frames)
    : cfg_(cfg) {
  if (cfg_.rep == Representation::grid) {
    grid_ = std::make_unique<HashGridSet>(tape, cfg_.grid, "grid");
    tmpl_ = std::make_unique<TemplateNerf>(tape, cfg_.tmpl, grid_->feature_dim(),
                                           kShDim, "nerf");
  } else {
    bank_ = std::make_unique<KeyframeBank>(tape, cfg_.bank, n_frames, "bank");
    int fdim = cfg_.bank.static_dim + cfg_.bank.dynamic_dim();
    tmpl_ = std::make_unique<TemplateNerf>(tape, cfg_.tmpl, fdim, kShDim,
                                           "nerf_coarse");
    tmpl_fine_ =
        std::make_unique<TemplateNerf>(tape, cfg_.tmpl, fdim, kShDim, "nerf_fine");
  }
}

void FieldModel::init_params(Tape& tape, uint64_t seed) const {
  if (grid_) grid_->init_tables(tape, seed);
  if (bank_) bank_->init_params(tape, seed);
  tmpl_->init_params(tape, mix_seed(seed, 0x74315ull));
  if (tmpl_fine_) tmpl_fine_->init_params(tape, mix_seed(seed, 0x74325ull));
}

int FieldModel::feature_dim() const {
  if (grid_) return grid_->feature_dim();
  return cfg_.bank.static_dim + cfg_.bank.dynamic_dim();
}

FieldModel::SampleNodes FieldModel::sample_node(Graph& g, const double x[3],
                                                const TimeContext& tc, int enc_dir,
                                                double alpha_x, double alpha_z,
                                                bool fine) const {
  SampleNodes out;
  int feature;
  if (grid_) {
    feature = grid_->encode_node(g, x, tc.t);
  } else {
    if (tc.frame_b >= 0)
      throw std::runtime_error("training graph queries must target one frame");
    out.enc_x = bank_->posenc_x_node(g, x, alpha_x);
    int enc_z = bank_->posenc_z_node(g, tc.frame_a, alpha_z);
    out.vdyn = bank_->dynamic_node(g, out.enc_x, enc_z, tc.t);
    if (cfg_.bank.static_dim > 0) {
      int vs = bank_->static_node(g, out.enc_x);
      feature = g.concat({vs, out.vdyn});
    } else {
      feature = out.vdyn;
    }
  }
  TemplateNerf::EvalNodes ev = tmpl(fine).eval_node(g, feature, enc_dir);
  out.sigma = ev.sigma;
  out.rgb = ev.rgb;
  return out;
}

void FieldModel::feature_raw(const Tape& tape, const double x[3],
                             const TimeContext& tc, double alpha_x, double alpha_z,
                             double* out) const {
  if (grid_) {
    grid_->encode_raw(tape, x, tc.t, out);
    return;
  }
  double* o = out;
  if (cfg_.bank.static_dim > 0) {
    bank_->static_raw(tape, x, alpha_x, o);
    o += cfg_.bank.static_dim;
  }
  if (tc.frame_b >= 0) {
    bank_->dynamic_raw_time_blend(tape, x, tc.frame_a, tc.frame_b, tc.t_a, tc.t_b,
                                  tc.t, alpha_x, alpha_z, o);
  } else {
    bank_->dynamic_raw(tape, x, tc.frame_a, tc.t, alpha_x, alpha_z, o);
  }
}

void FieldModel::point_raw(const Tape& tape, const double x[3],
                           const TimeContext& tc, const double sh_dir[kShDim],
                           double alpha_x, double alpha_z, double rgb[3],
                           double* sigma, bool fine) const {
  static thread_local std::vector<double> feat;
  feat.resize(static_cast<size_t>(feature_dim()));
  feature_raw(tape, x, tc, alpha_x, alpha_z, feat.data());
  tmpl(fine).eval_raw(tape, feat.data(), sh_dir, rgb, sigma);
}

double FieldModel::sigma_raw(const Tape& tape, const double x[3], double t,
                             double alpha_x, double alpha_z) const {
  static thread_local std::vector<double> feat;
  feat.resize(static_cast<size_t>(feature_dim()));
  TimeContext tc;
  tc.t = t;
  tc.frame_a = 0;
  if (bank_) {
    // density probes at arbitrary t use the nearest-frame embedding
    int f = static_cast<int>(t * static_cast<double>(bank_->n_frames() - 1) + 0.5);
    if (f < 0) f = 0;
    if (f > bank_->n_frames() - 1) f = bank_->n_frames() - 1;
    tc.frame_a = f;
  }
  feature_raw(tape, x, tc, alpha_x, alpha_z, feat.data());
  return tmpl(true).sigma_raw(tape, feat.data());
}

void FieldModel::features_raw(const Tape& tape, const double x[3],
                              const TimeContext& tc, double alpha_x, double alpha_z,
                              double* out) const {
  feature_raw(tape, x, tc, alpha_x, alpha_z, out);
}

}  // namespace tinerf
