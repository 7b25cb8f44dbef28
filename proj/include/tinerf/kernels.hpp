#pragma once

#include <cmath>
#include <cstdint>

// Raw math kernels shared by the autodiff graph and the no-grad evaluation
// path. Keeping one implementation for both guarantees that a checkpointed
// model renders bit-identically whether or not gradients are being tracked.

namespace tinerf::kernels {

inline void affine(const double* W, const double* b, int rows, int cols,
                   const double* x, double* out) {
  // Row-major W (rows x cols): out = W x + b. Plain loops vectorize fine
  // here and avoid Eigen temporaries for the small sizes we use.
  for (int r = 0; r < rows; ++r) {
    const double* w = W + static_cast<size_t>(r) * cols;
    double acc = b[r];
    for (int c = 0; c < cols; ++c) acc += w[c] * x[c];
    out[r] = acc;
  }
}

inline void relu(const double* x, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

inline void sigmoid(const double* x, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

inline void softplus(const double* x, int n, double* out) {
  // log(1+e^x), stable form: max(x,0) + log1p(e^{-|x|}).
  for (int i = 0; i < n; ++i) {
    double v = x[i];
    out[i] = (v > 0.0 ? v : 0.0) + std::log1p(std::exp(-std::fabs(v)));
  }
}

inline double softplus_deriv(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Weighted blend over a column slice of k table rows:
//   out[d] = sum_i w[i] * table[idx[i]*stride + d],  d < n_out.
// Callers offset `table` to select the column window within each row.
inline void gather_blend(const double* table, uint32_t stride, const uint32_t* idx,
                         const double* w, int k, uint32_t n_out, double* out) {
  for (uint32_t d = 0; d < n_out; ++d) out[d] = 0.0;
  for (int i = 0; i < k; ++i) {
    const double* row = table + static_cast<size_t>(idx[i]) * stride;
    double wi = w[i];
    for (uint32_t d = 0; d < n_out; ++d) out[d] += wi * row[d];
  }
}

// Frequency weight for coarse-to-fine positional encoding. alpha grows from
// 0 to L over training; band k fades in smoothly while alpha crosses [k, k+1].
inline double posenc_band_weight(double alpha, int k) {
  double c = alpha - static_cast<double>(k);
  if (c < 0.0) c = 0.0;
  if (c > 1.0) c = 1.0;
  return 0.5 * (1.0 - std::cos(M_PI * c));
}

inline int posenc_dim(int n, int bands) { return n + 2 * n * bands; }

// Layout: [x | sin(2^0 pi x), cos(2^0 pi x) | sin(2^1 pi x), ... ].
inline void posenc(const double* x, int n, int bands, double alpha, double* out) {
  for (int i = 0; i < n; ++i) out[i] = x[i];
  double* o = out + n;
  for (int k = 0; k < bands; ++k) {
    double wk = posenc_band_weight(alpha, k);
    double f = std::ldexp(M_PI, k);  // 2^k * pi
    for (int i = 0; i < n; ++i) {
      double a = f * x[i];
      o[i] = wk * std::sin(a);
      o[n + i] = wk * std::cos(a);
    }
    o += 2 * n;
  }
}

// Emission/absorption compositing along one ray.
//   alpha_k = 1 - exp(-sigma_k * du_k)
//   T_k     = prod_{j<k} (1 - alpha_j)
//   out     = [ sum T a c_rgb, sum T a u, sum T a ]
// alpha_T stash (2n doubles: alpha then T) is kept for the backward pass.
inline void composite_forward(const double* sigma, const double* rgb,
                              const double* du, const double* u, int n,
                              double* alpha_T, double out[5]) {
  double T = 1.0;
  double r = 0.0, g = 0.0, b = 0.0, depth = 0.0, opac = 0.0;
  for (int k = 0; k < n; ++k) {
    double a = 1.0 - std::exp(-sigma[k] * du[k]);
    alpha_T[k] = a;
    alpha_T[n + k] = T;
    double w = T * a;
    r += w * rgb[3 * k + 0];
    g += w * rgb[3 * k + 1];
    b += w * rgb[3 * k + 2];
    depth += w * u[k];
    opac += w;
    T *= 1.0 - a;
  }
  out[0] = r;
  out[1] = g;
  out[2] = b;
  out[3] = depth;
  out[4] = opac;
}

// Adjoints of composite_forward. seed g5 = d(loss)/d(out[0..4]).
// With w_k = T_k alpha_k and f_k = (c_k, u_k, 1):
//   d/d c_k   = w_k * g_rgb
//   d/d sig_k = du_k * ( T_{k+1} * <g,f_k> - sum_{j>k} w_j <g,f_j> )
inline void composite_backward(const double* /*sigma*/, const double* rgb,
                               const double* du, const double* u, int n,
                               const double* alpha_T, const double g5[5],
                               double* dsigma, double* drgb) {
  double suffix = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    double a = alpha_T[k];
    double T = alpha_T[n + k];
    double w = T * a;
    double gf = g5[0] * rgb[3 * k + 0] + g5[1] * rgb[3 * k + 1] +
                g5[2] * rgb[3 * k + 2] + g5[3] * u[k] + g5[4];
    dsigma[k] = du[k] * (T * (1.0 - a) * gf - suffix);
    drgb[3 * k + 0] = w * g5[0];
    drgb[3 * k + 1] = w * g5[1];
    drgb[3 * k + 2] = w * g5[2];
    suffix += w * gf;
  }
}

}  // namespace tinerf::kernels
