#include "tinerf/graph.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "tinerf/kernels.hpp"

namespace tinerf {

using CMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>;
using MMat = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                      Eigen::RowMajor>>;
using CVec = Eigen::Map<const Eigen::VectorXd>;
using MVec = Eigen::Map<Eigen::VectorXd>;

void Graph::reset() {
  nodes_.clear();
  vals_.clear();
  adjs_.clear();
  ints_.clear();
  dbls_.clear();
}

int Graph::push(Node n) {
  n.val_off = vals_.size();
  vals_.resize(vals_.size() + static_cast<size_t>(n.dim));
  adjs_.resize(vals_.size(), 0.0);
  // adjoint slots for reused arena space must start at zero
  std::memset(adjs_.data() + n.val_off, 0, sizeof(double) * static_cast<size_t>(n.dim));
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::constant(const double* v, int dim) {
  Node n;
  n.op = Op::constant;
  n.dim = dim;
  int id = push(n);
  std::memcpy(val(id), v, sizeof(double) * static_cast<size_t>(dim));
  return id;
}

int Graph::gather(int seg_id, const uint32_t* idx, const double* w, int k,
                  uint32_t col_off, uint32_t col_len) {
  const auto& s = tape_->seg(seg_id);
  if (s.row_len == 0) throw std::runtime_error("gather on dense segment " + s.name);
  if (col_len == 0) col_len = s.row_len - col_off;
  if (col_off + col_len > s.row_len) throw std::runtime_error("gather slice overflow");
  Node n;
  n.op = Op::gather;
  n.dim = static_cast<int>(col_len);
  n.seg = seg_id;
  n.p0 = col_off;
  n.rows = k;
  n.i0 = ints_.size();
  ints_.insert(ints_.end(), idx, idx + k);
  n.d0 = dbls_.size();
  dbls_.insert(dbls_.end(), w, w + k);
  int id = push(n);
  kernels::gather_blend(tape_->seg_values(seg_id) + col_off, s.row_len, idx, w, k,
                        col_len, val(id));
  return id;
}

int Graph::affine(int w_seg, size_t w_off, int rows, int cols, int b_seg,
                  size_t b_off, int x) {
  if (dim(x) != cols) throw std::runtime_error("affine input dim mismatch");
  Node n;
  n.op = Op::affine;
  n.dim = rows;
  n.a = x;
  n.seg = w_seg;
  n.seg2 = b_seg;
  n.p0 = w_off;
  n.p1 = b_off;
  n.rows = rows;
  n.cols = cols;
  int id = push(n);
  kernels::affine(tape_->seg_values(w_seg) + w_off, tape_->seg_values(b_seg) + b_off,
                  rows, cols, val(x), val(id));
  return id;
}

int Graph::relu(int x) {
  Node n;
  n.op = Op::relu;
  n.dim = dim(x);
  n.a = x;
  int id = push(n);
  kernels::relu(val(x), n.dim, val(id));
  return id;
}

int Graph::sigmoid(int x) {
  Node n;
  n.op = Op::sigmoid;
  n.dim = dim(x);
  n.a = x;
  int id = push(n);
  kernels::sigmoid(val(x), n.dim, val(id));
  return id;
}

int Graph::softplus(int x) {
  Node n;
  n.op = Op::softplus;
  n.dim = dim(x);
  n.a = x;
  int id = push(n);
  kernels::softplus(val(x), n.dim, val(id));
  return id;
}

int Graph::posenc(int x, int bands, double alpha) {
  Node n;
  n.op = Op::posenc;
  n.dim = kernels::posenc_dim(dim(x), bands);
  n.a = x;
  n.rows = bands;
  n.wa = alpha;
  int id = push(n);
  kernels::posenc(val(x), dim(x), bands, alpha, val(id));
  return id;
}

int Graph::concat(const int* xs, int count) {
  Node n;
  n.op = Op::concat;
  n.dim = 0;
  n.i0 = ints_.size();
  for (int i = 0; i < count; ++i) {
    n.dim += dim(xs[i]);
    ints_.push_back(static_cast<uint32_t>(xs[i]));
  }
  n.rows = count;
  int id = push(n);
  double* o = val(id);
  for (int i = 0; i < count; ++i) {
    std::memcpy(o, val(xs[i]), sizeof(double) * static_cast<size_t>(dim(xs[i])));
    o += dim(xs[i]);
  }
  return id;
}

int Graph::blend(double wa, int a, double wb, int b) {
  if (b >= 0 && dim(a) != dim(b)) throw std::runtime_error("blend dim mismatch");
  Node n;
  n.op = Op::blend;
  n.dim = dim(a);
  n.a = a;
  n.b = b;
  n.wa = wa;
  n.wb = wb;
  int id = push(n);
  const double* va = val(a);
  const double* vb = b >= 0 ? val(b) : nullptr;
  double* o = val(id);
  for (int i = 0; i < n.dim; ++i) o[i] = wa * va[i] + (vb ? wb * vb[i] : 0.0);
  return id;
}

int Graph::composite(const int* sigma_ids, const int* rgb_ids, int count,
                     const double* du, const double* u) {
  Node n;
  n.op = Op::composite;
  n.dim = 5;
  n.rows = count;
  n.i0 = ints_.size();
  for (int k = 0; k < count; ++k) ints_.push_back(static_cast<uint32_t>(sigma_ids[k]));
  for (int k = 0; k < count; ++k) ints_.push_back(static_cast<uint32_t>(rgb_ids[k]));
  // dbls span: du | u | sigma | rgb*3 | alpha | T  (8n doubles)
  n.d0 = dbls_.size();
  dbls_.resize(dbls_.size() + static_cast<size_t>(8 * count));
  {
    double* d = dbls_.data() + n.d0;
    std::memcpy(d, du, sizeof(double) * static_cast<size_t>(count));
    std::memcpy(d + count, u, sizeof(double) * static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
      if (dim(sigma_ids[k]) != 1 || dim(rgb_ids[k]) != 3)
        throw std::runtime_error("composite expects scalar sigma, 3-vector rgb");
      d[2 * count + k] = value(sigma_ids[k])[0];
      std::memcpy(d + 3 * count + 3 * k, value(rgb_ids[k]), sizeof(double) * 3);
    }
  }
  int id = push(n);
  double* d = dbls_.data() + nodes_.back().d0;
  kernels::composite_forward(d + 2 * count, d + 3 * count, d, d + count, count,
                             d + 6ull * count, val(id));
  return id;
}

int Graph::composite_over_bg(int composite_node, const double bg[3]) {
  if (dim(composite_node) != 5)
    throw std::runtime_error("composite_over_bg expects a 5-dim composite node");
  Node n;
  n.op = Op::over_bg;
  n.dim = 3;
  n.a = composite_node;
  n.d0 = dbls_.size();
  dbls_.insert(dbls_.end(), bg, bg + 3);
  int id = push(n);
  const double* c = val(composite_node);
  double* o = val(id);
  double trans = 1.0 - c[4];
  for (int i = 0; i < 3; ++i) o[i] = c[i] + bg[i] * trans;
  return id;
}

void Graph::composite_weights(int composite_node, std::vector<double>& out) const {
  const Node& n = nodes_[static_cast<size_t>(composite_node)];
  if (n.op != Op::composite)
    throw std::runtime_error("composite_weights on non-composite node");
  int cnt = n.rows;
  const double* alpha = dbls_.data() + n.d0 + 6ull * cnt;
  const double* T = alpha + cnt;
  out.resize(static_cast<size_t>(cnt));
  for (int k = 0; k < cnt; ++k) out[static_cast<size_t>(k)] = T[k] * alpha[k];
}

int Graph::sq_err(int x, const double* target) {
  Node n;
  n.op = Op::sq_err;
  n.dim = 1;
  n.a = x;
  n.d0 = dbls_.size();
  dbls_.insert(dbls_.end(), target, target + dim(x));
  int id = push(n);
  const double* v = val(x);
  const double* t = dbls_.data() + nodes_.back().d0;
  double acc = 0.0;
  for (int i = 0; i < dim(x); ++i) {
    double e = v[i] - t[i];
    acc += e * e;
  }
  val(id)[0] = acc;
  return id;
}

int Graph::sqdiff(int a, int b) {
  if (dim(a) != dim(b)) throw std::runtime_error("sqdiff dim mismatch");
  Node n;
  n.op = Op::sqdiff;
  n.dim = 1;
  n.a = a;
  n.b = b;
  int id = push(n);
  const double* va = val(a);
  const double* vb = val(b);
  double acc = 0.0;
  for (int i = 0; i < dim(a); ++i) {
    double e = va[i] - vb[i];
    acc += e * e;
  }
  val(id)[0] = acc;
  return id;
}

int Graph::row_sqdiff(int seg_id, uint32_t row_a, uint32_t row_b, uint32_t col_off,
                      uint32_t col_len) {
  const auto& s = tape_->seg(seg_id);
  if (s.row_len == 0) throw std::runtime_error("row_sqdiff on dense segment " + s.name);
  if (col_len == 0) col_len = s.row_len - col_off;
  if (col_off + col_len > s.row_len) throw std::runtime_error("row_sqdiff slice overflow");
  Node n;
  n.op = Op::row_sqdiff;
  n.dim = 1;
  n.seg = seg_id;
  n.p0 = row_a;
  n.p1 = row_b;
  n.rows = static_cast<int>(col_off);
  n.cols = static_cast<int>(col_len);
  int id = push(n);
  const double* base = tape_->seg_values(seg_id) + col_off;
  const double* a = base + static_cast<size_t>(row_a) * s.row_len;
  const double* b = base + static_cast<size_t>(row_b) * s.row_len;
  double acc = 0.0;
  for (uint32_t d = 0; d < col_len; ++d) {
    double e = a[d] - b[d];
    acc += e * e;
  }
  val(id)[0] = acc;
  return id;
}

void Graph::backward(const Seed* seeds, int n_seeds, GradBuffer& gbuf) {
  for (int s = 0; s < n_seeds; ++s) {
    if (dim(seeds[s].node) != 1)
      throw std::runtime_error("backward seeds must be scalar nodes");
    adj(seeds[s].node)[0] += seeds[s].weight;
  }
  static thread_local std::vector<double> scratch;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    const Node& n = nodes_[static_cast<size_t>(i)];
    const double* g = adj(i);
    switch (n.op) {
      case Op::constant:
        break;
      case Op::gather: {
        const uint32_t* idx = ints_.data() + n.i0;
        const double* w = dbls_.data() + n.d0;
        for (int k = 0; k < n.rows; ++k) {
          double* dst = gbuf.row(n.seg, idx[k]) + n.p0;
          double wk = w[k];
          for (int d = 0; d < n.dim; ++d) dst[d] += wk * g[d];
        }
        break;
      }
      case Op::affine: {
        CMat W(tape_->seg_values(n.seg) + n.p0, n.rows, n.cols);
        CVec gv(g, n.rows);
        CVec xv(val(n.a), n.cols);
        MVec(adj(n.a), n.cols).noalias() += W.transpose() * gv;
        MMat(gbuf.dense(n.seg) + n.p0, n.rows, n.cols).noalias() +=
            gv * xv.transpose();
        double* gb = gbuf.dense(n.seg2) + n.p1;
        for (int r = 0; r < n.rows; ++r) gb[r] += g[r];
        break;
      }
      case Op::relu: {
        const double* x = val(n.a);
        double* da = adj(n.a);
        for (int d = 0; d < n.dim; ++d)
          if (x[d] > 0.0) da[d] += g[d];
        break;
      }
      case Op::sigmoid: {
        const double* y = val(i);
        double* da = adj(n.a);
        for (int d = 0; d < n.dim; ++d) da[d] += y[d] * (1.0 - y[d]) * g[d];
        break;
      }
      case Op::softplus: {
        const double* x = val(n.a);
        double* da = adj(n.a);
        for (int d = 0; d < n.dim; ++d) da[d] += kernels::softplus_deriv(x[d]) * g[d];
        break;
      }
      case Op::posenc: {
        const double* x = val(n.a);
        double* da = adj(n.a);
        int in = dim(n.a);
        for (int d = 0; d < in; ++d) da[d] += g[d];
        const double* go = g + in;
        for (int k = 0; k < n.rows; ++k) {
          double wk = kernels::posenc_band_weight(n.wa, k);
          double f = std::ldexp(M_PI, k);
          for (int d = 0; d < in; ++d) {
            double a = f * x[d];
            da[d] += wk * f * (std::cos(a) * go[d] - std::sin(a) * go[in + d]);
          }
          go += 2 * in;
        }
        break;
      }
      case Op::concat: {
        const uint32_t* xs = ints_.data() + n.i0;
        const double* gp = g;
        for (int c = 0; c < n.rows; ++c) {
          int src = static_cast<int>(xs[c]);
          double* da = adj(src);
          int d = dim(src);
          for (int t = 0; t < d; ++t) da[t] += gp[t];
          gp += d;
        }
        break;
      }
      case Op::blend: {
        double* da = adj(n.a);
        for (int d = 0; d < n.dim; ++d) da[d] += n.wa * g[d];
        if (n.b >= 0) {
          double* db = adj(n.b);
          for (int d = 0; d < n.dim; ++d) db[d] += n.wb * g[d];
        }
        break;
      }
      case Op::composite: {
        int cnt = n.rows;
        const double* d = dbls_.data() + n.d0;
        scratch.resize(static_cast<size_t>(4 * cnt));
        double* dsig = scratch.data();
        double* drgb = scratch.data() + cnt;
        kernels::composite_backward(d + 2 * cnt, d + 3 * cnt, d, d + cnt, cnt,
                                    d + 6ull * cnt, g, dsig, drgb);
        const uint32_t* sig_ids = ints_.data() + n.i0;
        const uint32_t* rgb_ids = sig_ids + cnt;
        for (int k = 0; k < cnt; ++k) {
          adj(static_cast<int>(sig_ids[k]))[0] += dsig[k];
          double* dr = adj(static_cast<int>(rgb_ids[k]));
          dr[0] += drgb[3 * k + 0];
          dr[1] += drgb[3 * k + 1];
          dr[2] += drgb[3 * k + 2];
        }
        break;
      }
      case Op::over_bg: {
        const double* bg = dbls_.data() + n.d0;
        double* da = adj(n.a);
        for (int d = 0; d < 3; ++d) {
          da[d] += g[d];
          da[4] -= bg[d] * g[d];
        }
        break;
      }
      case Op::sq_err: {
        const double* x = val(n.a);
        const double* t = dbls_.data() + n.d0;
        double* da = adj(n.a);
        double g0 = g[0];
        for (int d = 0; d < dim(n.a); ++d) da[d] += 2.0 * (x[d] - t[d]) * g0;
        break;
      }
      case Op::sqdiff: {
        const double* va = val(n.a);
        const double* vb = val(n.b);
        double* da = adj(n.a);
        double* db = adj(n.b);
        double g0 = g[0];
        for (int d = 0; d < dim(n.a); ++d) {
          double e = 2.0 * (va[d] - vb[d]) * g0;
          da[d] += e;
          db[d] -= e;
        }
        break;
      }
      case Op::row_sqdiff: {
        const auto& s = tape_->seg(n.seg);
        uint32_t off = static_cast<uint32_t>(n.rows);
        uint32_t len = static_cast<uint32_t>(n.cols);
        const double* base = tape_->seg_values(n.seg) + off;
        const double* a = base + n.p0 * s.row_len;
        const double* b = base + n.p1 * s.row_len;
        double* da = gbuf.row(n.seg, static_cast<uint32_t>(n.p0)) + off;
        double* db = gbuf.row(n.seg, static_cast<uint32_t>(n.p1)) + off;
        double g0 = g[0];
        for (uint32_t d = 0; d < len; ++d) {
          double e = 2.0 * (a[d] - b[d]) * g0;
          da[d] += e;
          db[d] -= e;
        }
        break;
      }
    }
  }
}

}  // namespace tinerf
