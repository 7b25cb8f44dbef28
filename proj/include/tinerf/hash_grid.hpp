#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "tinerf/graph.hpp"
#include "tinerf/tape.hpp"

// Multi-level hash-grid feature encoder. Each level owns one table of
// (m_s + m_d)-wide rows; the first m_s columns are addressed by 3D spatial
// hashing (static features), the remaining m_d by 4D space-time hashing
// (dynamic features). Queries blend 8 (3D) or 16 (4D) hashed corner rows.

namespace tinerf {

struct HashGridConfig {
  int levels = 12;
  uint32_t table_size = 1u << 19;  // must be a power of two
  int m_s = 2;
  int m_d = 6;
  double spatial_base = 8.0;
  double spatial_scale = 1.45;
  double temporal_base = 2.0;
  double temporal_scale = 1.4;
  // XOR-hash multipliers; first axis multiplier 1 keeps x-adjacent cells
  // adjacent in the table at coarse levels.
  uint64_t primes[4] = {1ull, 2654435761ull, 805459861ull, 3674653429ull};

  void validate() const;  // throws on violated invariants
};

struct LevelRes {
  int spatial = 0;   // cells per spatial axis (vertices = spatial+1)
  int temporal = 0;  // cells along time
};

// floor(base * scale^l) spatially; temporal scale advances every other level.
std::vector<LevelRes> level_resolutions(const HashGridConfig& cfg);

// (xor_i coords[i]*primes[i]) mod H with wrapping 64-bit products.
uint64_t hash_index(const uint32_t* coords, int d, uint32_t table_size,
                    const uint64_t primes[4]);

class HashGridSet {
 public:
  // Registers one tape segment per level ("<prefix>.level<l>"); values are
  // left at zero — call init_tables to apply the U[-1e-4,1e-4] init.
  HashGridSet(Tape& tape, const HashGridConfig& cfg, const std::string& prefix);

  void init_tables(Tape& tape, uint64_t seed) const;

  const HashGridConfig& config() const { return cfg_; }
  const std::vector<LevelRes>& resolutions() const { return res_; }
  int level_segment(int level) const { return seg_[static_cast<size_t>(level)]; }
  int feature_dim() const { return cfg_.levels * (cfg_.m_s + cfg_.m_d); }
  int row_len() const { return cfg_.m_s + cfg_.m_d; }

  struct Corners3 {
    uint32_t idx[8];
    double w[8];
  };
  // 4D corners split by temporal slab so the smoothness term can reach the
  // per-slab rows; full 16-corner weights are w[i]*wt_a and w[i]*(1-wt_a).
  struct Corners4 {
    uint32_t idx_a[8];  // rows at the earlier temporal slab t_a
    uint32_t idx_b[8];  // rows at t_b = t_a + 1 (lattice units)
    double w[8];        // trilinear spatial weights (sum to 1)
    double wt_a = 1.0;  // temporal weight of slab a
    int slab_a = 0;
    double t_a = 0.0, t_b = 0.0;  // slab times in [0,1]
  };

  Corners3 corners_3d(const double x[3], int level) const;
  Corners4 corners_4d(const double x[3], double t, int level) const;

  // Feature layout: per level l ascending, [static m_s | dynamic m_d].
  int encode_node(Graph& g, const double x[3], double t) const;
  void encode_raw(const Tape& tape, const double x[3], double t, double* out) const;

  // Dynamic (4D) features of one level with the temporal coordinate pinned to
  // an exact lattice slab: the spatial blend of the m_d columns at rows
  // hash(corner, slab). This is the h_4(x, t_slab) the temporal-interpolation
  // identity and the smoothness term are written against.
  void slab_features(const Tape& tape, const double x[3], int level, uint32_t slab,
                     double* out_md) const;

  uint64_t clamp_count() const { return clamps_.load(std::memory_order_relaxed); }

 private:
  double clamp01(double v) const;

  HashGridConfig cfg_;
  std::vector<LevelRes> res_;
  std::vector<int> seg_;
  mutable std::atomic<uint64_t> clamps_{0};
};

}  // namespace tinerf
