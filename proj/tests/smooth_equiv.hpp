#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tinerf/hash_grid.hpp"
#include "tinerf/rng.hpp"

// Temporal-interpolation identity check shared by the unit test and the
// acceptance suite. Within one temporal cell the encoding is linear in t, so
// for any two times t1 < t2 in the cell of width (t_b - t_a):
//
//   enc_d(x, t2) - enc_d(x, t1) = (t2 - t1) * eps * (h4(x, slab_b) - h4(x, slab_a))
//
// with eps = 1 / (t_b - t_a). This is the statement that makes penalizing
// per-slab row differences a bound on adjacent-frame feature change.

namespace smooth_equiv {

struct Result {
  int pairs = 0;        // (x, frame pair, level) triples actually checked
  double worst = 0.0;   // max relative error over all checked feature vectors
};

// Draws random x and adjacent normalized frame times t_i = i/(n_frames-1),
// skips pairs straddling a slab boundary at the level under test, and checks
// the identity over all levels until `target_pairs` checks have run.
inline Result run(int target_pairs, uint64_t seed, int n_frames) {
  using tinerf::HashGridConfig;
  using tinerf::HashGridSet;
  using tinerf::Rng;
  using tinerf::RngStream;
  using tinerf::Tape;

  HashGridConfig cfg;
  cfg.levels = 8;
  cfg.table_size = 1u << 14;
  cfg.m_s = 2;
  cfg.m_d = 6;
  Tape tape;
  HashGridSet grid(tape, cfg, "grid");
  // the identity is linear in the table contents; O(1) values condition the
  // relative-error denominator
  Rng fill(seed, RngStream::misc, 0ull);
  for (size_t i = 0; i < tape.size(); ++i) tape.values()[i] = fill.uniform(-1.0, 1.0);

  const int dim = cfg.m_s + cfg.m_d;
  std::vector<double> e1(static_cast<size_t>(grid.feature_dim()));
  std::vector<double> e2(e1.size());
  std::vector<double> ha(static_cast<size_t>(cfg.m_d)), hb(ha.size());

  Result res;
  Rng rng(seed, RngStream::misc, 1ull);
  while (res.pairs < target_pairs) {
    double x[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    int i = static_cast<int>(rng.below(static_cast<uint64_t>(n_frames - 1)));
    double t1 = static_cast<double>(i) / (n_frames - 1);
    double t2 = static_cast<double>(i + 1) / (n_frames - 1);
    grid.encode_raw(tape, x, t1, e1.data());
    grid.encode_raw(tape, x, t2, e2.data());

    for (int l = 0; l < cfg.levels; ++l) {
      auto c1 = grid.corners_4d(x, t1, l);
      auto c2 = grid.corners_4d(x, t2, l);
      if (c1.slab_a != c2.slab_a) continue;  // straddles a slab boundary

      grid.slab_features(tape, x, l, static_cast<uint32_t>(c1.slab_a), ha.data());
      grid.slab_features(tape, x, l, static_cast<uint32_t>(c1.slab_a) + 1, hb.data());
      double eps = 1.0 / (c1.t_b - c1.t_a);
      const double* d1 = e1.data() + l * dim + cfg.m_s;
      const double* d2 = e2.data() + l * dim + cfg.m_s;

      double num = 0.0, den = 0.0;
      for (int d = 0; d < cfg.m_d; ++d) {
        double want = (t2 - t1) * eps * (hb[static_cast<size_t>(d)] - ha[static_cast<size_t>(d)]);
        double got = d2[d] - d1[d];
        num = std::max(num, std::fabs(got - want));
        den = std::max(den, std::fabs(want));
      }
      res.worst = std::max(res.worst, num / std::max(den, 1e-30));
      ++res.pairs;
      if (res.pairs >= target_pairs) break;
    }
  }
  return res;
}

}  // namespace smooth_equiv
