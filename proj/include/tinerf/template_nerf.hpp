#pragma once

#include <string>
#include <vector>

#include "tinerf/dense.hpp"
#include "tinerf/graph.hpp"
#include "tinerf/tape.hpp"

// Template NeRF head: ReLU trunk on the feature vector, softplus density from
// the trunk output, and one extra color layer on [trunk output, SH(d)]
// squashed by a sigmoid.

namespace tinerf {

struct TemplateNerfConfig {
  int layers = 3;        // trunk depth (affine+relu pairs)
  int hidden = 128;
  int color_hidden = 128;
  int skip_layer = -1;   // trunk layer index whose input gets [h, feature]
  double density_bias = -8.0;  // sigma head bias init; softplus(-8) ~ 3.4e-4

  void validate() const;
};

class TemplateNerf {
 public:
  TemplateNerf(Tape& tape, const TemplateNerfConfig& cfg, int feature_dim,
               int dir_dim, const std::string& prefix);

  void init_params(Tape& tape, uint64_t seed) const;

  const TemplateNerfConfig& config() const { return cfg_; }
  int feature_dim() const { return feature_dim_; }

  struct EvalNodes {
    int sigma;  // scalar, softplus-activated
    int rgb;    // 3-vector in [0,1]
  };
  EvalNodes eval_node(Graph& g, int feature, int enc_dir) const;
  // Density-only subgraph (occupancy queries during training never need color).
  int sigma_node(Graph& g, int feature) const;

  void eval_raw(const Tape& tape, const double* feature, const double* enc_dir,
                double* rgb, double* sigma) const;
  double sigma_raw(const Tape& tape, const double* feature) const;

 private:
  int trunk_node(Graph& g, int feature) const;
  void trunk_raw(const Tape& tape, const double* feature, double* h,
                 double* scratch) const;

  TemplateNerfConfig cfg_;
  int feature_dim_ = 0;
  int dir_dim_ = 0;
  std::vector<Dense> trunk_;
  Dense sigma_head_;
  Dense color0_;
  Dense color1_;
};

}  // namespace tinerf
