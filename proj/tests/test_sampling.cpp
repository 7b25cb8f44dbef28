#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tinerf/sampling.hpp"

using namespace tinerf;

TEST_CASE("stratified samples land one per bin with bin-width du") {
  Rng rng(7, RngStream::stratified, 0ull);
  double u0 = 1.5, u1 = 3.5;
  int n = 16;
  auto s = stratified_samples(u0, u1, n, rng);
  REQUIRE(s.size() == static_cast<size_t>(n));
  double w = (u1 - u0) / n;
  for (int i = 0; i < n; ++i) {
    CHECK(s[static_cast<size_t>(i)].u >= u0 + i * w);
    CHECK(s[static_cast<size_t>(i)].u < u0 + (i + 1) * w);
    if (i + 1 < n) CHECK(s[static_cast<size_t>(i)].du == w);
  }
  CHECK(s.back().du == kTerminalDu);

  CHECK_THROWS(stratified_samples(u0, u1, 0, rng));
  CHECK_THROWS(stratified_samples(3.5, 1.5, 4, rng));
}

TEST_CASE("importance draws follow the weight histogram") {
  // chi-square against the normalized weights over many draws
  Rng rng(11, RngStream::importance, 0ull);
  double u0 = 0.0, u1 = 1.0;
  std::vector<double> weights = {1.0, 0.0, 4.0, 2.0, 0.0, 1.0, 8.0, 0.0};
  size_t n = weights.size();
  std::vector<double> coarse_u;  // empty: output = drawn samples only
  int m = 40000;
  auto s = importance_samples(u0, u1, coarse_u, weights, m, rng);
  REQUIRE(s.size() == static_cast<size_t>(m));

  std::vector<int> counts(n, 0);
  for (const SamplePoint& p : s) {
    size_t bin = std::min(n - 1, static_cast<size_t>(p.u * static_cast<double>(n)));
    counts[bin]++;
  }
  double total = 0.0;
  for (double w : weights) total += w;
  double chi2 = 0.0;
  int dof = 0;
  for (size_t i = 0; i < n; ++i) {
    double expect = m * weights[i] / total;
    if (weights[i] == 0.0) {
      CHECK(counts[i] == 0);  // zero-weight bins must never be drawn
      continue;
    }
    chi2 += (counts[i] - expect) * (counts[i] - expect) / expect;
    ++dof;
  }
  --dof;
  // dof = 4; P(chi2 > 20) < 5e-4, and the draw is deterministic anyway
  CHECK(chi2 < 20.0);
}

TEST_CASE("importance merges coarse depths in ascending order") {
  Rng rng(3, RngStream::importance, 1ull);
  std::vector<double> coarse_u = {0.9, 0.1, 0.5};  // deliberately unsorted
  std::vector<double> weights = {1.0, 1.0, 1.0};
  auto s = importance_samples(0.0, 1.0, coarse_u, weights, 5, rng);
  REQUIRE(s.size() == 8);
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    CHECK(s[i].u <= s[i + 1].u);
    CHECK(s[i].du == doctest::Approx(s[i + 1].u - s[i].u));
  }
  CHECK(s.back().du == kTerminalDu);
  // every coarse depth must survive the merge
  for (double cu : coarse_u)
    CHECK(std::any_of(s.begin(), s.end(),
                      [&](const SamplePoint& p) { return p.u == cu; }));
}

TEST_CASE("all-zero weights fall back to the uniform pdf") {
  Rng rng(5, RngStream::importance, 2ull);
  std::vector<double> weights(8, 0.0);
  std::vector<double> coarse_u;
  int m = 8000;
  auto s = importance_samples(0.0, 1.0, coarse_u, weights, m, rng);
  std::vector<int> counts(8, 0);
  for (const SamplePoint& p : s)
    counts[std::min<size_t>(7, static_cast<size_t>(p.u * 8.0))]++;
  for (int c : counts) CHECK(std::fabs(c - 1000.0) < 150.0);

  std::vector<double> neg = {1.0, -0.5};
  CHECK_THROWS(importance_samples(0.0, 1.0, coarse_u, neg, 4, rng));
  CHECK_THROWS(importance_samples(0.0, 1.0, coarse_u, weights, 0, rng));
}

TEST_CASE("rng streams are order-independent and distinct") {
  // same (seed, stream, counters) reproduces; different counters decorrelate
  Rng a(42, RngStream::stratified, 7ull, 3ull);
  Rng b(42, RngStream::stratified, 7ull, 3ull);
  for (int i = 0; i < 8; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42, RngStream::stratified, 7ull, 4ull);
  Rng d(42, RngStream::importance, 7ull, 3ull);
  CHECK(c.next_u64() != d.next_u64());
  Rng e(42, RngStream::stratified, 7ull, 3ull);
  CHECK(e.next_u64() != c.next_u64());

  // uniform() stays inside [0,1)
  Rng f(9);
  for (int i = 0; i < 1000; ++i) {
    double v = f.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}
