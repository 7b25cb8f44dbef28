#include <doctest.h>

#include <cmath>
#include <vector>

#include "tinerf/encoding.hpp"
#include "tinerf/graph.hpp"
#include "tinerf/kernels.hpp"
#include "tinerf/rng.hpp"
#include "tinerf/tape.hpp"

using namespace tinerf;

namespace {

// Independent SH oracle assembled from associated Legendre polynomials and
// factorial normalization (graphics convention: no Condon-Shortley phase).
double legendre(int l, int m, double z) {
  double pmm = 1.0;
  if (m > 0) {
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int i = 1; i <= m; ++i) pmm *= (2.0 * i - 1.0) * s;
  }
  if (l == m) return pmm;
  double pmm1 = z * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmm1;
  double plm = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    plm = ((2.0 * ll - 1.0) * z * pmm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmm1;
    pmm1 = plm;
  }
  return plm;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double sh_oracle(int l, int m, const double d[3]) {
  double z = d[2];
  double phi = std::atan2(d[1], d[0]);
  int am = std::abs(m);
  double k = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * factorial(l - am) /
                       factorial(l + am));
  if (m == 0) return k * legendre(l, 0, z);
  double p = std::sqrt(2.0) * k * legendre(l, am, z);
  return m > 0 ? p * std::cos(am * phi) : p * std::sin(am * phi);
}

void unit_dir(Rng& rng, double d[3]) {
  double n = 0.0;
  do {
    for (int a = 0; a < 3; ++a) d[a] = 2.0 * rng.uniform() - 1.0;
    n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  } while (n < 0.2 || n > 1.0);
  for (int a = 0; a < 3; ++a) d[a] /= n;
}

}  // namespace

TEST_CASE("sh16 matches the Legendre-recurrence oracle") {
  Rng rng(8801, RngStream::misc, 0, 0);
  for (int trial = 0; trial < 300; ++trial) {
    double d[3];
    unit_dir(rng, d);
    double out[16];
    sh16(d, out);
    int i = 0;
    for (int l = 0; l <= 3; ++l)
      for (int m = -l; m <= l; ++m, ++i)
        CHECK(out[i] == doctest::Approx(sh_oracle(l, m, d)).epsilon(1e-12));
  }
}

TEST_CASE("sh16 band norms hit the closed form (2l+1)/4pi") {
  Rng rng(8802, RngStream::misc, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    double d[3];
    unit_dir(rng, d);
    double out[16];
    sh16(d, out);
    int i = 0;
    for (int l = 0; l <= 3; ++l) {
      double s = 0.0;
      for (int m = -l; m <= l; ++m, ++i) s += out[i] * out[i];
      CHECK(s == doctest::Approx((2.0 * l + 1.0) / (4.0 * M_PI)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sh16 zeroes every m != 0 term on the +z axis") {
  double d[3] = {0.0, 0.0, 1.0};
  double out[16];
  sh16(d, out);
  int i = 0;
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m, ++i)
      if (m != 0) CHECK(out[i] == 0.0);
}

TEST_CASE("posenc_alpha ramps linearly then saturates") {
  CHECK(posenc_alpha(0, 1000, 8, 0.2) == 0.0);
  CHECK(posenc_alpha(100, 1000, 8, 0.2) == doctest::Approx(4.0));
  CHECK(posenc_alpha(200, 1000, 8, 0.2) == 8.0);
  CHECK(posenc_alpha(900, 1000, 8, 0.2) == 8.0);
  CHECK(posenc_alpha(0, 1000, 8, 0.0) == 8.0);  // ramp disabled: fully open
}

TEST_CASE("posenc band window fades bands in across alpha") {
  // below the band: silent; above: fully open; halfway: the cosine ramp
  CHECK(kernels::posenc_band_weight(2.0, 2) == 0.0);
  CHECK(kernels::posenc_band_weight(3.0, 2) == 1.0);
  CHECK(kernels::posenc_band_weight(2.5, 2) == doctest::Approx(0.5));
  double x[2] = {0.3, -0.7};
  double out[2 + 2 * 2 * 3];
  kernels::posenc(x, 2, 3, 1.5, out);
  CHECK(out[0] == 0.3);  // identity passthrough ahead of the bands
  CHECK(out[1] == -0.7);
  CHECK(out[2] == doctest::Approx(std::sin(M_PI * 0.3)));          // band 0 open
  CHECK(out[2 + 4] == doctest::Approx(0.5 * std::sin(2 * M_PI * 0.3)));  // half
  CHECK(out[2 + 8] == 0.0);                                        // band 2 shut
}

TEST_CASE("graph posenc equals the kernel bit for bit") {
  Tape tape;
  int seg = tape.add_segment("z", 3, 3, ParamClass::embedding);
  tape.seg_values(seg)[0] = 0.21;
  tape.seg_values(seg)[1] = -0.67;
  tape.seg_values(seg)[2] = 1.43;
  Graph g(tape);
  uint32_t idx = 0;
  double w = 1.0;
  int z = g.gather(seg, &idx, &w, 1);
  int enc = g.posenc(z, 4, 2.3);
  std::vector<double> want(static_cast<size_t>(kernels::posenc_dim(3, 4)));
  kernels::posenc(tape.seg_values(seg), 3, 4, 2.3, want.data());
  REQUIRE(g.dim(enc) == static_cast<int>(want.size()));
  for (size_t i = 0; i < want.size(); ++i) CHECK(g.value(enc)[i] == want[i]);
}
