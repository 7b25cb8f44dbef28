#include "tinerf/adam.hpp"

#include <cmath>

namespace tinerf {

Adam::Adam(const Tape& tape, const AdamConfig& cfg)
    : cfg_(cfg), m_(tape.size(), 0.0), v_(tape.size(), 0.0) {}

bool Adam::step(Tape& tape, double lr) {
  const double* g = tape.grads();
  for (const auto& s : tape.segments()) {
    if (s.cls == ParamClass::state) continue;
    for (size_t i = s.offset; i < s.offset + s.size; ++i) {
      if (!std::isfinite(g[i])) {
        ++rejected_;
        tape.zero_grads();
        return false;
      }
    }
  }

  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double* p = tape.values();
  for (const auto& s : tape.segments()) {
    if (s.cls == ParamClass::state) continue;
    bool grid = s.cls == ParamClass::grid_table;
    double b2 = grid ? cfg_.beta2_grid : cfg_.beta2_mlp;
    double eps = grid ? cfg_.eps_grid : cfg_.eps_mlp;
    double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (size_t i = s.offset; i < s.offset + s.size; ++i) {
      double gi = g[i];
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * gi;
      v_[i] = b2 * v_[i] + (1.0 - b2) * gi * gi;
      double mhat = m_[i] / bc1;
      double vhat = v_[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
  tape.zero_grads();
  return true;
}

double LrSchedule::at(uint64_t it) const {
  if (kind == Kind::exponential) {
    double frac = total == 0 ? 0.0
                             : static_cast<double>(it) / static_cast<double>(total);
    return lr0 * std::pow(lr_end / lr0, frac);
  }
  if (it < decay_start) return lr0;
  uint64_t n = 1 + (it - decay_start) / decay_every;
  return lr0 * std::pow(decay_factor, static_cast<double>(n));
}

}  // namespace tinerf
