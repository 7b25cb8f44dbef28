#pragma once

#include <cstdint>
#include <vector>

#include "tinerf/tape.hpp"

// Adam with bias correction and per-segment-class hyperparameters: hash-table
// rows see sparse spiky gradients and run with the looser (beta2=0.99,
// eps=1e-15) setting; MLP weights and embeddings use the textbook values.
// Segments of class `state` are not parameters and are skipped entirely.

namespace tinerf {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2_grid = 0.99;
  double eps_grid = 1e-15;
  double beta2_mlp = 0.999;
  double eps_mlp = 1e-8;
};

class Adam {
 public:
  Adam(const Tape& tape, const AdamConfig& cfg);

  // One update from tape.grads() at learning rate lr; gradients are zeroed
  // afterwards either way. A non-finite gradient anywhere rejects the whole
  // step (moments and step count untouched) and returns false.
  bool step(Tape& tape, double lr);

  uint64_t steps() const { return t_; }
  uint64_t rejected_steps() const { return rejected_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  uint64_t t_ = 0;
  uint64_t rejected_ = 0;
};

// Learning-rate schedules. The staircase form decays by `decay_factor` at
// `decay_start` and every `decay_every` iterations after that (grid path);
// the exponential form sweeps lr0 -> lr_end over `total` iterations (neural
// path).
struct LrSchedule {
  enum class Kind { staircase, exponential };
  Kind kind = Kind::staircase;
  double lr0 = 0.01;
  double lr_end = 5e-5;
  uint64_t total = 300000;
  uint64_t decay_start = 20000;
  uint64_t decay_every = 10000;
  double decay_factor = 0.33;

  double at(uint64_t it) const;
};

}  // namespace tinerf
