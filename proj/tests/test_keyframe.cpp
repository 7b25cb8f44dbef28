#include <doctest.h>

#include <cmath>
#include <vector>

#include "tinerf/graph.hpp"
#include "tinerf/kernels.hpp"
#include "tinerf/keyframe_field.hpp"
#include "tinerf/rng.hpp"
#include "tinerf/tape.hpp"

using namespace tinerf;

namespace {

KeyframeBankConfig small_bank() {
  KeyframeBankConfig c;
  c.levels = 2;
  c.slots = {2, 4};
  c.dims = {6, 5};
  c.static_dim = 7;
  c.embed_dim = 4;
  c.posenc_x_bands = 2;
  c.posenc_z_bands = 1;
  return c;
}

}  // namespace

TEST_CASE("keyframe weights: index law and boundary values") {
  std::atomic<uint64_t> clamps{0};
  for (int n : {2, 4, 5}) {
    for (int i = 0; i <= n; ++i) {
      double t = static_cast<double>(i) / n;
      KeyframeWeights kw = keyframe_weights(t, n, &clamps);
      if (i < n) {
        CHECK(kw.i == i);
        CHECK(kw.dt == doctest::Approx(1.0).epsilon(1e-15));
      } else {
        // t = 1 folds into the last interval with zero weight on its left end
        CHECK(kw.i == n - 1);
        CHECK(kw.dt == doctest::Approx(0.0).epsilon(1e-15));
      }
    }
    KeyframeWeights mid = keyframe_weights(0.5 / n, n, &clamps);
    CHECK(mid.i == 0);
    CHECK(mid.dt == doctest::Approx(0.5));
  }
  CHECK(clamps.load() == 0);
  keyframe_weights(-0.1, 4, &clamps);
  keyframe_weights(1.1, 4, &clamps);
  CHECK(clamps.load() == 2);
}

TEST_CASE("keyframe queries reproduce the owning MLP exactly") {
  Tape tape;
  KeyframeBankConfig cfg = small_bank();
  cfg.levels = 1;
  cfg.slots = {3};
  cfg.dims = {6};
  KeyframeBank bank(tape, cfg, 4, "kb");
  bank.init_params(tape, 42);
  Rng rng(9901, RngStream::misc, 0, 0);

  for (int k = 0; k <= 3; ++k) {
    double t = static_cast<double>(k) / 3.0;
    double x[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    int frame = static_cast<int>(rng.below(4));

    Graph g(tape);
    int ex = bank.posenc_x_node(g, x, 1e9);
    int ez = bank.posenc_z_node(g, frame, 1e9);
    int dyn = bank.dynamic_node(g, ex, ez, t);

    // the same phi evaluated by hand: concat(enc_x, enc_z) -> l0 -> relu -> l1
    const Dense& l0 = bank.phi(0, k, 0);
    const Dense& l1 = bank.phi(0, k, 1);
    int in = g.concat({ex, ez});
    int h = g.relu(l0.node(g, in));
    int want = l1.node(g, h);

    REQUIRE(g.dim(dyn) == g.dim(want));
    for (int d = 0; d < g.dim(dyn); ++d) CHECK(g.value(dyn)[d] == g.value(want)[d]);
  }
}

TEST_CASE("keyframe interpolation has local support") {
  Tape tape;
  KeyframeBankConfig cfg = small_bank();
  cfg.levels = 1;
  cfg.slots = {4};  // keyframes 0..4 at t = 0, .25, .5, .75, 1
  cfg.dims = {6};
  KeyframeBank bank(tape, cfg, 4, "kb");
  bank.init_params(tape, 43);
  double x[3] = {0.3, 0.6, 0.2};
  double t = 0.3;  // interval [0.25, 0.5]: only keyframes 1 and 2 matter

  auto eval = [&]() {
    Graph g(tape);
    int ex = bank.posenc_x_node(g, x, 1e9);
    int ez = bank.posenc_z_node(g, 1, 1e9);
    int dyn = bank.dynamic_node(g, ex, ez, t);
    return std::vector<double>(g.value(dyn), g.value(dyn) + g.dim(dyn));
  };
  std::vector<double> base = eval();

  // trashing the non-owning keyframes (0, 3, 4) must not move the output
  for (int k : {0, 3, 4}) {
    for (int layer : {0, 1}) {
      const Dense& d = bank.phi(0, k, layer);
      double* w = tape.seg_values(d.w_seg);
      for (int i = 0; i < d.in * d.out; ++i) w[i] += 100.0;
    }
  }
  std::vector<double> after = eval();
  REQUIRE(after.size() == base.size());
  for (size_t i = 0; i < base.size(); ++i) CHECK(after[i] == base[i]);

  // trashing an owning keyframe must move it (bias: immune to dead relus)
  const Dense& d1 = bank.phi(0, 1, 1);
  tape.seg_values(d1.b_seg)[0] += 1.0;
  std::vector<double> moved = eval();
  bool any = false;
  for (size_t i = 0; i < base.size(); ++i) any = any || moved[i] != base[i];
  CHECK(any);
}

TEST_CASE("dynamic feature is linear between adjacent keyframes") {
  Tape tape;
  KeyframeBankConfig cfg = small_bank();
  cfg.levels = 1;
  cfg.slots = {2};
  cfg.dims = {5};
  KeyframeBank bank(tape, cfg, 3, "kb");
  bank.init_params(tape, 44);
  double x[3] = {0.7, 0.1, 0.4};

  auto eval = [&](double t) {
    std::vector<double> out(static_cast<size_t>(cfg.dims[0]));
    bank.dynamic_raw(tape, x, 0, t, 1e9, 1e9, out.data());
    return out;
  };
  // interval [0, 0.5] of a 2-slot level: phi_0 at 0, phi_1 at 0.5
  std::vector<double> a = eval(0.0), b = eval(0.5), mid = eval(0.2);
  for (size_t i = 0; i < a.size(); ++i) {
    double want = a[i] * (1.0 - 0.4) + b[i] * 0.4;  // dt = (1 - 0.2*2) = 0.6
    CHECK(mid[i] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("raw and graph dynamic features agree bit for bit") {
  Tape tape;
  KeyframeBankConfig cfg = small_bank();
  KeyframeBank bank(tape, cfg, 5, "kb");
  bank.init_params(tape, 45);
  Rng rng(9902, RngStream::misc, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    double x[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    double t = rng.uniform();
    int frame = static_cast<int>(rng.below(5));
    double ax = 2.0 * rng.uniform(), az = rng.uniform();

    std::vector<double> raw(static_cast<size_t>(cfg.dynamic_dim()));
    bank.dynamic_raw(tape, x, frame, t, ax, az, raw.data());
    std::vector<double> sraw(static_cast<size_t>(cfg.static_dim));
    bank.static_raw(tape, x, ax, sraw.data());

    Graph g(tape);
    int ex = bank.posenc_x_node(g, x, ax);
    int ez = bank.posenc_z_node(g, frame, az);
    int dyn = bank.dynamic_node(g, ex, ez, t);
    int st = bank.static_node(g, ex);
    for (int d = 0; d < cfg.dynamic_dim(); ++d)
      CHECK(g.value(dyn)[d] == raw[static_cast<size_t>(d)]);
    for (int d = 0; d < cfg.static_dim; ++d)
      CHECK(g.value(st)[d] == sraw[static_cast<size_t>(d)]);
  }
}

TEST_CASE("evaluation-time blend interpolates the two bracketing frames") {
  Tape tape;
  KeyframeBankConfig cfg = small_bank();
  KeyframeBank bank(tape, cfg, 5, "kb");
  bank.init_params(tape, 46);
  double x[3] = {0.25, 0.5, 0.75};
  double ta = 0.25, tb = 0.5;  // frames 1 and 2 of 5 on a [0,1] timeline

  std::vector<double> va(static_cast<size_t>(cfg.dynamic_dim()));
  std::vector<double> vb(static_cast<size_t>(cfg.dynamic_dim()));
  std::vector<double> blend(static_cast<size_t>(cfg.dynamic_dim()));
  bank.dynamic_raw(tape, x, 1, ta, 1e9, 1e9, va.data());
  bank.dynamic_raw(tape, x, 2, tb, 1e9, 1e9, vb.data());

  bank.dynamic_raw_time_blend(tape, x, 1, 2, ta, tb, ta, 1e9, 1e9, blend.data());
  for (int d = 0; d < cfg.dynamic_dim(); ++d)
    CHECK(blend[static_cast<size_t>(d)] == va[static_cast<size_t>(d)]);

  bank.dynamic_raw_time_blend(tape, x, 1, 2, ta, tb, tb, 1e9, 1e9, blend.data());
  for (int d = 0; d < cfg.dynamic_dim(); ++d)
    CHECK(blend[static_cast<size_t>(d)] == vb[static_cast<size_t>(d)]);

  double tm = 0.35;
  double wa = (tb - tm) / (tb - ta);
  bank.dynamic_raw_time_blend(tape, x, 1, 2, ta, tb, tm, 1e9, 1e9, blend.data());
  for (int d = 0; d < cfg.dynamic_dim(); ++d)
    CHECK(blend[static_cast<size_t>(d)] ==
          doctest::Approx(wa * va[static_cast<size_t>(d)] +
                          (1.0 - wa) * vb[static_cast<size_t>(d)])
              .epsilon(1e-12));

  CHECK_THROWS(bank.dynamic_raw_time_blend(tape, x, 1, 3, ta, tb, tm, 1e9, 1e9,
                                           blend.data()));
}
