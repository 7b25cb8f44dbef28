#include "tinerf/hash_grid.hpp"

#include <cmath>
#include <stdexcept>

#include "tinerf/kernels.hpp"
#include "tinerf/rng.hpp"

namespace tinerf {

void HashGridConfig::validate() const {
  if (levels < 1) throw std::runtime_error("hash grid: levels must be >= 1");
  if (table_size == 0 || (table_size & (table_size - 1)) != 0)
    throw std::runtime_error("hash grid: table_size must be a power of two");
  if (m_s < 0) throw std::runtime_error("hash grid: m_s must be >= 0");
  if (m_d < 1) throw std::runtime_error("hash grid: m_d must be >= 1");
  if (spatial_base < 1.0 || temporal_base < 1.0)
    throw std::runtime_error("hash grid: base resolutions must be >= 1");
  if (spatial_scale < 1.0 || temporal_scale < 1.0)
    throw std::runtime_error("hash grid: scale factors must be >= 1");
}

std::vector<LevelRes> level_resolutions(const HashGridConfig& cfg) {
  std::vector<LevelRes> out(static_cast<size_t>(cfg.levels));
  for (int l = 0; l < cfg.levels; ++l) {
    out[static_cast<size_t>(l)].spatial =
        static_cast<int>(std::floor(cfg.spatial_base * std::pow(cfg.spatial_scale, l)));
    out[static_cast<size_t>(l)].temporal = static_cast<int>(
        std::floor(cfg.temporal_base * std::pow(cfg.temporal_scale, l / 2)));
  }
  return out;
}

uint64_t hash_index(const uint32_t* coords, int d, uint32_t table_size,
                    const uint64_t primes[4]) {
  uint64_t acc = 0;
  for (int i = 0; i < d; ++i) acc ^= static_cast<uint64_t>(coords[i]) * primes[i];
  return acc & (static_cast<uint64_t>(table_size) - 1);
}

HashGridSet::HashGridSet(Tape& tape, const HashGridConfig& cfg,
                         const std::string& prefix)
    : cfg_(cfg) {
  cfg_.validate();
  res_ = level_resolutions(cfg_);
  uint32_t row = static_cast<uint32_t>(cfg_.m_s + cfg_.m_d);
  for (int l = 0; l < cfg_.levels; ++l) {
    seg_.push_back(tape.add_segment(prefix + ".level" + std::to_string(l),
                                    static_cast<size_t>(cfg_.table_size) * row, row,
                                    ParamClass::grid_table));
  }
}

void HashGridSet::init_tables(Tape& tape, uint64_t seed) const {
  for (int l = 0; l < cfg_.levels; ++l) {
    Rng rng(seed, RngStream::param_init, 0x67726964ull /* 'grid' */,
            static_cast<uint64_t>(l));
    double* v = tape.seg_values(seg_[static_cast<size_t>(l)]);
    size_t n = tape.seg(seg_[static_cast<size_t>(l)]).size;
    for (size_t i = 0; i < n; ++i) v[i] = rng.uniform(-1e-4, 1e-4);
  }
}

double HashGridSet::clamp01(double v) const {
  if (v < 0.0 || v > 1.0) {
    clamps_.fetch_add(1, std::memory_order_relaxed);
    return v < 0.0 ? 0.0 : 1.0;
  }
  return v;
}

namespace {

// cell index + fractional offset for one axis; x=1 clamps to the last cell.
inline void cell_of(double x, int res, uint32_t* cell, double* frac) {
  double s = x * static_cast<double>(res);
  int c = static_cast<int>(std::floor(s));
  if (c < 0) c = 0;
  if (c > res - 1) c = res - 1;
  *cell = static_cast<uint32_t>(c);
  *frac = s - static_cast<double>(c);
}

}  // namespace

HashGridSet::Corners3 HashGridSet::corners_3d(const double x[3], int level) const {
  const LevelRes& r = res_[static_cast<size_t>(level)];
  uint32_t c[3];
  double f[3];
  for (int a = 0; a < 3; ++a) cell_of(clamp01(x[a]), r.spatial, &c[a], &f[a]);
  Corners3 out;
  for (int k = 0; k < 8; ++k) {
    uint32_t co[3];
    double w = 1.0;
    for (int a = 0; a < 3; ++a) {
      int bit = (k >> a) & 1;
      co[a] = c[a] + static_cast<uint32_t>(bit);
      w *= bit ? f[a] : 1.0 - f[a];
    }
    out.idx[k] = static_cast<uint32_t>(hash_index(co, 3, cfg_.table_size, cfg_.primes));
    out.w[k] = w;
  }
  return out;
}

HashGridSet::Corners4 HashGridSet::corners_4d(const double x[3], double t,
                                              int level) const {
  const LevelRes& r = res_[static_cast<size_t>(level)];
  uint32_t c[3];
  double f[3];
  for (int a = 0; a < 3; ++a) cell_of(clamp01(x[a]), r.spatial, &c[a], &f[a]);
  uint32_t ct;
  double ft;
  cell_of(clamp01(t), r.temporal, &ct, &ft);

  Corners4 out;
  out.wt_a = 1.0 - ft;
  out.slab_a = static_cast<int>(ct);
  out.t_a = static_cast<double>(ct) / static_cast<double>(r.temporal);
  out.t_b = static_cast<double>(ct + 1) / static_cast<double>(r.temporal);
  for (int k = 0; k < 8; ++k) {
    uint32_t co[4];
    double w = 1.0;
    for (int a = 0; a < 3; ++a) {
      int bit = (k >> a) & 1;
      co[a] = c[a] + static_cast<uint32_t>(bit);
      w *= bit ? f[a] : 1.0 - f[a];
    }
    co[3] = ct;
    out.idx_a[k] = static_cast<uint32_t>(hash_index(co, 4, cfg_.table_size, cfg_.primes));
    co[3] = ct + 1;
    out.idx_b[k] = static_cast<uint32_t>(hash_index(co, 4, cfg_.table_size, cfg_.primes));
    out.w[k] = w;
  }
  return out;
}

int HashGridSet::encode_node(Graph& g, const double x[3], double t) const {
  std::vector<int> parts;
  parts.reserve(static_cast<size_t>(cfg_.levels) * 2);
  uint32_t ms = static_cast<uint32_t>(cfg_.m_s);
  uint32_t md = static_cast<uint32_t>(cfg_.m_d);
  for (int l = 0; l < cfg_.levels; ++l) {
    int seg = seg_[static_cast<size_t>(l)];
    if (ms > 0) {
      Corners3 c3 = corners_3d(x, l);
      parts.push_back(g.gather(seg, c3.idx, c3.w, 8, 0, ms));
    }
    Corners4 c4 = corners_4d(x, t, l);
    uint32_t idx[16];
    double w[16];
    for (int k = 0; k < 8; ++k) {
      idx[k] = c4.idx_a[k];
      w[k] = c4.w[k] * c4.wt_a;
      idx[8 + k] = c4.idx_b[k];
      w[8 + k] = c4.w[k] * (1.0 - c4.wt_a);
    }
    parts.push_back(g.gather(seg, idx, w, 16, ms, md));
  }
  return g.concat(parts.data(), static_cast<int>(parts.size()));
}

void HashGridSet::slab_features(const Tape& tape, const double x[3], int level,
                                uint32_t slab, double* out_md) const {
  const LevelRes& r = res_[static_cast<size_t>(level)];
  uint32_t c[3];
  double f[3];
  for (int a = 0; a < 3; ++a) cell_of(clamp01(x[a]), r.spatial, &c[a], &f[a]);
  uint32_t idx[8];
  double w[8];
  for (int k = 0; k < 8; ++k) {
    uint32_t co[4];
    double wk = 1.0;
    for (int a = 0; a < 3; ++a) {
      int bit = (k >> a) & 1;
      co[a] = c[a] + static_cast<uint32_t>(bit);
      wk *= bit ? f[a] : 1.0 - f[a];
    }
    co[3] = slab;
    idx[k] = static_cast<uint32_t>(hash_index(co, 4, cfg_.table_size, cfg_.primes));
    w[k] = wk;
  }
  const double* table = tape.seg_values(seg_[static_cast<size_t>(level)]);
  uint32_t row = static_cast<uint32_t>(cfg_.m_s + cfg_.m_d);
  kernels::gather_blend(table + cfg_.m_s, row, idx, w, 8,
                        static_cast<uint32_t>(cfg_.m_d), out_md);
}

void HashGridSet::encode_raw(const Tape& tape, const double x[3], double t,
                             double* out) const {
  uint32_t ms = static_cast<uint32_t>(cfg_.m_s);
  uint32_t md = static_cast<uint32_t>(cfg_.m_d);
  uint32_t row = static_cast<uint32_t>(cfg_.m_s + cfg_.m_d);
  for (int l = 0; l < cfg_.levels; ++l) {
    const double* table = tape.seg_values(seg_[static_cast<size_t>(l)]);
    if (ms > 0) {
      Corners3 c3 = corners_3d(x, l);
      kernels::gather_blend(table, row, c3.idx, c3.w, 8, ms, out);
      out += ms;
    }
    Corners4 c4 = corners_4d(x, t, l);
    uint32_t idx[16];
    double w[16];
    for (int k = 0; k < 8; ++k) {
      idx[k] = c4.idx_a[k];
      w[k] = c4.w[k] * c4.wt_a;
      idx[8 + k] = c4.idx_b[k];
      w[8 + k] = c4.w[k] * (1.0 - c4.wt_a);
    }
    kernels::gather_blend(table + ms, row, idx, w, 16, md, out);
    out += md;
  }
}

}  // namespace tinerf
