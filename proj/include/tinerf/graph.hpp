#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "tinerf/tape.hpp"

// Define-by-run reverse-mode autodiff over small vector-valued nodes.
//
// One Graph instance is rebuilt per training ray (reset() keeps arena
// capacity, so steady-state builds allocate nothing). Forward values are
// computed eagerly at node creation via the shared kernels; backward() walks
// the node list in reverse and scatters parameter gradients into a
// GradBuffer. Multiple scalar losses can be seeded in one backward sweep.

namespace tinerf {

class Graph {
 public:
  explicit Graph(Tape& tape) : tape_(&tape) {}

  void reset();

  // --- node constructors (all return node ids; forward runs immediately) ---
  int constant(const double* v, int dim);
  // Weighted blend of the column slice [col_off, col_off+col_len) over k rows
  // of a row-addressed segment. col_len = 0 means the full row.
  int gather(int seg_id, const uint32_t* idx, const double* w, int k,
             uint32_t col_off = 0, uint32_t col_len = 0);
  // out = W x + b, W row-major (rows x cols) at seg[w_seg]+w_off.
  int affine(int w_seg, size_t w_off, int rows, int cols, int b_seg, size_t b_off,
             int x);
  int relu(int x);
  int sigmoid(int x);
  int softplus(int x);
  int posenc(int x, int bands, double alpha);
  int concat(const int* xs, int n);
  int concat(std::initializer_list<int> xs) {
    return concat(xs.begin(), static_cast<int>(xs.size()));
  }
  // out = wa*a + wb*b (pass b = -1 for plain scaling).
  int blend(double wa, int a, double wb, int b);
  // Volume rendering over n samples; sigma_ids are scalar nodes, rgb_ids
  // 3-vector nodes. Output dim 5: [r, g, b, depth, opacity].
  int composite(const int* sigma_ids, const int* rgb_ids, int n, const double* du,
                const double* u);
  // Pixel color over a constant background: out = comp.rgb + bg*(1 - comp.opacity).
  int composite_over_bg(int composite_node, const double bg[3]);
  // Scalar sum of squared error against a constant target.
  int sq_err(int x, const double* target);
  // Scalar ||a - b||^2.
  int sqdiff(int a, int b);
  // Scalar ||row_a[c] - row_b[c]||^2 over the column slice [col_off,
  // col_off+col_len) of a row-addressed segment (grid smoothness on adjacent
  // temporal slabs; the slice selects the time-varying feature columns).
  // col_len = 0 means the full row.
  int row_sqdiff(int seg_id, uint32_t row_a, uint32_t row_b, uint32_t col_off = 0,
                 uint32_t col_len = 0);

  int dim(int node) const { return nodes_[static_cast<size_t>(node)].dim; }
  const double* value(int node) const {
    return vals_.data() + nodes_[static_cast<size_t>(node)].val_off;
  }
  // Per-sample weights T_k * alpha_k of a composite node (importance sampling).
  void composite_weights(int composite_node, std::vector<double>& out) const;

  struct Seed {
    int node;    // scalar node id
    double weight;
  };
  void backward(const Seed* seeds, int n_seeds, GradBuffer& gbuf);

  size_t num_nodes() const { return nodes_.size(); }

 private:
  enum class Op : uint8_t {
    constant,
    gather,
    affine,
    relu,
    sigmoid,
    softplus,
    posenc,
    concat,
    blend,
    composite,
    over_bg,
    sq_err,
    sqdiff,
    row_sqdiff,
  };

  struct Node {
    Op op;
    int dim = 0;
    size_t val_off = 0;
    int a = -1, b = -1;       // input node ids
    int seg = -1, seg2 = -1;  // parameter segments (affine W/b, gather table)
    size_t p0 = 0, p1 = 0;    // offsets within segments
    int rows = 0, cols = 0;   // affine shape / gather k / posenc bands / n samples
    size_t i0 = 0;            // span into ints_
    size_t d0 = 0;            // span into dbls_
    double wa = 0.0, wb = 0.0;
  };

  int push(Node n);           // allocates value+adjoint arena space
  double* val(int id) { return vals_.data() + nodes_[static_cast<size_t>(id)].val_off; }
  double* adj(int id) { return adjs_.data() + nodes_[static_cast<size_t>(id)].val_off; }

  Tape* tape_;
  std::vector<Node> nodes_;
  std::vector<double> vals_, adjs_;
  std::vector<uint32_t> ints_;
  std::vector<double> dbls_;
};

// Finite-difference gradient check helper (central differences, step h).
// Returns max over `indices` of |analytic - fd| / (|analytic| + denom_floor);
// the floor keeps FD cancellation noise from dominating near-zero entries.
// `forward` must recompute the scalar loss from current tape values.
template <class F>
double grad_check_max_rel_err(Tape& tape, const double* analytic_grads,
                              const std::vector<size_t>& indices, F&& forward,
                              double h = 1e-5, double denom_floor = 1e-3) {
  double worst = 0.0;
  for (size_t idx : indices) {
    double saved = tape.values()[idx];
    tape.values()[idx] = saved + h;
    double up = forward();
    tape.values()[idx] = saved - h;
    double dn = forward();
    tape.values()[idx] = saved;
    double fd = (up - dn) / (2.0 * h);
    double an = analytic_grads[idx];
    double rel = std::fabs(an - fd) / (std::fabs(an) + denom_floor);
    if (rel > worst) worst = rel;
  }
  return worst;
}

}  // namespace tinerf
