#include "tinerf/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tinerf {

OccupancyGrid::OccupancyGrid(Tape& tape, const OccupancyConfig& cfg)
    : cfg_(cfg), tape_(&tape) {
  if (cfg_.res < 1) throw std::runtime_error("occupancy: res must be >= 1");
  if (cfg_.decay <= 0.0 || cfg_.decay > 1.0)
    throw std::runtime_error("occupancy: decay must be in (0,1]");
  if (cfg_.warmup_sweeps < 0)
    throw std::runtime_error("occupancy: warmup_sweeps must be >= 0");
  seg_ = tape.add_segment("occupancy.cache", cells() + 1, 0, ParamClass::state);
  bits_.assign(cells(), 0);
  refresh_bits();
}

size_t OccupancyGrid::cell_index(int cx, int cy, int cz) const {
  return (static_cast<size_t>(cz) * cfg_.res + cy) * cfg_.res + cx;
}

uint64_t OccupancyGrid::sweeps() const {
  return static_cast<uint64_t>(tape_->seg_values(seg_)[cells()]);
}

void OccupancyGrid::update(const DensityFn& sigma, uint64_t seed, ThreadPool* pool) {
  size_t n = cells();
  double* cache = tape_->seg_values(seg_);
  uint64_t sweep = sweeps();
  auto body = [&](int, size_t begin, size_t end) {
    double inv = 1.0 / static_cast<double>(cfg_.res);
    for (size_t i = begin; i < end; ++i) {
      Rng rng(seed, RngStream::occupancy, sweep, i);
      int cx = static_cast<int>(i % static_cast<size_t>(cfg_.res));
      int cy = static_cast<int>((i / static_cast<size_t>(cfg_.res)) %
                                static_cast<size_t>(cfg_.res));
      int cz = static_cast<int>(i / (static_cast<size_t>(cfg_.res) * cfg_.res));
      double x[3] = {(cx + rng.uniform()) * inv, (cy + rng.uniform()) * inv,
                     (cz + rng.uniform()) * inv};
      double t = rng.uniform();
      double s = sigma(x, t);
      double decayed = cache[i] * cfg_.decay;
      cache[i] = s > decayed ? s : decayed;
    }
  };
  if (pool)
    pool->for_chunks(n, body);
  else
    body(0, 0, n);
  cache[n] = static_cast<double>(sweep + 1);
  refresh_bits();
}

void OccupancyGrid::refresh_bits() {
  if (sweeps() < static_cast<uint64_t>(cfg_.warmup_sweeps)) {
    mark_all();
    return;
  }
  const double* cache = tape_->seg_values(seg_);
  for (size_t i = 0; i < bits_.size(); ++i)
    bits_[i] = cache[i] > cfg_.threshold ? 1 : 0;
}

bool OccupancyGrid::occupied(const double x[3]) const {
  int c[3];
  for (int a = 0; a < 3; ++a) {
    double s = x[a] * static_cast<double>(cfg_.res);
    int ci = static_cast<int>(s);  // x is in [0,1] here; truncation == floor
    if (ci < 0) ci = 0;
    if (ci > cfg_.res - 1) ci = cfg_.res - 1;
    c[a] = ci;
  }
  return bits_[cell_index(c[0], c[1], c[2])] != 0;
}

bool OccupancyGrid::cell_occupied(int cx, int cy, int cz) const {
  return bits_[cell_index(cx, cy, cz)] != 0;
}

double OccupancyGrid::cached(int cx, int cy, int cz) const {
  return tape_->seg_values(seg_)[cell_index(cx, cy, cz)];
}

double OccupancyGrid::occupied_fraction() const {
  size_t k = 0;
  for (uint8_t b : bits_) k += b;
  return static_cast<double>(k) / static_cast<double>(bits_.size());
}

void OccupancyGrid::mark_all() {
  std::fill(bits_.begin(), bits_.end(), 1);
}

}  // namespace tinerf
