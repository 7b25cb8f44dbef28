#pragma once

#include <string>

#include "tinerf/graph.hpp"
#include "tinerf/kernels.hpp"
#include "tinerf/rng.hpp"
#include "tinerf/tape.hpp"

// One dense (affine) layer living on the tape as a weight + bias segment.

namespace tinerf {

struct Dense {
  int w_seg = -1;
  int b_seg = -1;
  int in = 0;
  int out = 0;

  static Dense create(Tape& tape, const std::string& name, int in, int out) {
    Dense d;
    d.in = in;
    d.out = out;
    d.w_seg = tape.add_segment(name + ".weight",
                               static_cast<size_t>(in) * static_cast<size_t>(out), 0,
                               ParamClass::mlp);
    d.b_seg = tape.add_segment(name + ".bias", static_cast<size_t>(out), 0,
                               ParamClass::mlp);
    return d;
  }

  // He-uniform fan-in init: W ~ U[-sqrt(6/in), sqrt(6/in)], b = 0.
  void init_kaiming(Tape& tape, Rng& rng) const {
    double bound = std::sqrt(6.0 / static_cast<double>(in));
    double* w = tape.seg_values(w_seg);
    size_t n = static_cast<size_t>(in) * static_cast<size_t>(out);
    for (size_t i = 0; i < n; ++i) w[i] = rng.uniform(-bound, bound);
    double* b = tape.seg_values(b_seg);
    for (int i = 0; i < out; ++i) b[i] = 0.0;
  }

  int node(Graph& g, int x) const { return g.affine(w_seg, 0, out, in, b_seg, 0, x); }

  void raw(const Tape& tape, const double* x, double* o) const {
    kernels::affine(tape.seg_values(w_seg), tape.seg_values(b_seg), out, in, x, o);
  }
};

}  // namespace tinerf
