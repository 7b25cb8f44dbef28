#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tinerf/parallel.hpp"
#include "tinerf/rng.hpp"
#include "tinerf/tape.hpp"

// Coarse boolean cache of where density exceeds a threshold, over the unit
// cube of normalized scene coordinates. A full-grid sweep decays every cached
// density and re-probes each cell at one jittered position and one random
// time, so space occupied at any time stays marked.
//
// The cache lives in a non-trainable tape segment ("occupancy.cache", class
// state) so checkpoints carry it: a render from a restored checkpoint culls
// exactly like the training-time eval render it must reproduce.

namespace tinerf {

struct OccupancyConfig {
  int res = 64;
  double decay = 0.99;
  double threshold = 1e-4;
  int update_every = 16;   // sweep cadence in training iterations
  int warmup_sweeps = 32;  // sweeps during which the bits stay all-occupied
};

class OccupancyGrid {
 public:
  // Registers the cache segment: res^3 cell values plus one trailing slot
  // holding the sweep counter.
  OccupancyGrid(Tape& tape, const OccupancyConfig& cfg);

  const OccupancyConfig& config() const { return cfg_; }

  // sigma(x, t) with x in the unit cube, t in [0,1].
  using DensityFn = std::function<double(const double[3], double)>;

  // Full sweep: cache = max(cache*decay, sigma(jittered point, random t)).
  // Deterministic given (seed, sweep counter); parallel over cells.
  void update(const DensityFn& sigma, uint64_t seed, ThreadPool* pool);

  // Rebuilds the occupancy bits from the cached values (call after restoring
  // a checkpoint into the tape). Until warmup_sweeps sweeps have completed
  // the bits stay all-occupied so an untrained density field cannot cull
  // space it has not learned yet; the cache accrues normally throughout.
  void refresh_bits();

  bool occupied(const double x[3]) const;
  bool cell_occupied(int cx, int cy, int cz) const;
  double cached(int cx, int cy, int cz) const;

  uint64_t sweeps() const;
  double occupied_fraction() const;

  // Everything-marked state for paths that must not skip (warm-up, tests).
  void mark_all();

 private:
  size_t cell_index(int cx, int cy, int cz) const;
  size_t cells() const {
    return static_cast<size_t>(cfg_.res) * cfg_.res * cfg_.res;
  }

  OccupancyConfig cfg_;
  Tape* tape_;
  int seg_;
  std::vector<uint8_t> bits_;
};

}  // namespace tinerf
