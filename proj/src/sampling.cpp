#include "tinerf/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace tinerf {

std::vector<SamplePoint> stratified_samples(double u_near, double u_far, int n,
                                            Rng& rng) {
  if (n < 1) throw std::runtime_error("stratified_samples: n must be >= 1");
  if (!(u_near < u_far)) throw std::runtime_error("stratified_samples: bad bounds");
  double w = (u_far - u_near) / static_cast<double>(n);
  std::vector<SamplePoint> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<size_t>(i)].u = u_near + (static_cast<double>(i) + rng.uniform()) * w;
    out[static_cast<size_t>(i)].du = w;
  }
  out.back().du = kTerminalDu;
  return out;
}

std::vector<SamplePoint> importance_samples(double u_near, double u_far,
                                            const std::vector<double>& coarse_u,
                                            const std::vector<double>& weights,
                                            int m, Rng& rng) {
  size_t n = weights.size();
  if (n == 0 || m < 1) throw std::runtime_error("importance_samples: empty input");
  std::vector<double> cdf(n);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw std::runtime_error("importance_samples: negative weight");
    total += weights[i];
    cdf[i] = total;
  }
  bool uniform_fallback = total <= 0.0;
  if (uniform_fallback) {
    for (size_t i = 0; i < n; ++i) cdf[i] = static_cast<double>(i + 1);
    total = static_cast<double>(n);
  }

  double bin_w = (u_far - u_near) / static_cast<double>(n);
  std::vector<double> drawn(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) {
    double v = rng.uniform() * total;
    size_t i = static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), v) - cdf.begin());
    if (i >= n) i = n - 1;
    double lo_cdf = i == 0 ? 0.0 : cdf[i - 1];
    double wi = cdf[i] - lo_cdf;
    double frac = wi > 0.0 ? (v - lo_cdf) / wi : 0.5;
    drawn[static_cast<size_t>(k)] =
        u_near + (static_cast<double>(i) + frac) * bin_w;
  }

  std::vector<double> merged;
  merged.reserve(coarse_u.size() + drawn.size());
  merged.insert(merged.end(), coarse_u.begin(), coarse_u.end());
  merged.insert(merged.end(), drawn.begin(), drawn.end());
  std::sort(merged.begin(), merged.end());

  std::vector<SamplePoint> out(merged.size());
  for (size_t i = 0; i < merged.size(); ++i) {
    out[i].u = merged[i];
    out[i].du = i + 1 < merged.size() ? merged[i + 1] - merged[i] : kTerminalDu;
  }
  return out;
}

}  // namespace tinerf
