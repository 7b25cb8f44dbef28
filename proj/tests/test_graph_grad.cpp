#include <doctest.h>

#include "grad_suite.hpp"

// Spot-count FD checks per op; the acceptance suite reruns the same functions
// at >= 100 instances. The 1e-4 bound matches the acceptance tolerance.

namespace {
constexpr int kN = 25;
constexpr double kTol = 1e-4;
}  // namespace

TEST_CASE("affine gradients match finite differences") {
  CHECK(grad_suite::check_affine(kN, 101) < kTol);
}

TEST_CASE("relu gradients match finite differences") {
  CHECK(grad_suite::check_relu(kN, 102) < kTol);
}

TEST_CASE("sigmoid gradients match finite differences") {
  CHECK(grad_suite::check_sigmoid(kN, 103) < kTol);
}

TEST_CASE("softplus gradients match finite differences") {
  CHECK(grad_suite::check_softplus(kN, 104) < kTol);
}

TEST_CASE("posenc gradients match finite differences") {
  CHECK(grad_suite::check_posenc(kN, 105) < kTol);
}

TEST_CASE("gather gradients accumulate across repeated rows") {
  CHECK(grad_suite::check_gather(kN, 106) < kTol);
}

TEST_CASE("blend and concat gradients match finite differences") {
  CHECK(grad_suite::check_blend_concat(kN, 107) < kTol);
}

TEST_CASE("composite gradients match finite differences") {
  CHECK(grad_suite::check_composite(kN, 108, false) < kTol);
}

TEST_CASE("composite over background gradients match finite differences") {
  CHECK(grad_suite::check_composite(kN, 109, true) < kTol);
}

TEST_CASE("sqdiff gradients match finite differences") {
  CHECK(grad_suite::check_sqdiff(kN, 110) < kTol);
}

TEST_CASE("row_sqdiff gradients match finite differences") {
  CHECK(grad_suite::check_row_sqdiff(kN, 111) < kTol);
}

TEST_CASE("hash encode gradients scatter to the right table rows") {
  CHECK(grad_suite::check_hash_encode(kN, 112) < kTol);
}

TEST_CASE("keyframe temporal blend gradients match finite differences") {
  CHECK(grad_suite::check_temporal_blend(10, 113) < kTol);
}

TEST_CASE("grid field sample gradients match finite differences") {
  CHECK(grad_suite::check_field_sample(8, 114, tinerf::Representation::grid) < kTol);
}

TEST_CASE("neural field sample gradients match finite differences") {
  CHECK(grad_suite::check_field_sample(8, 115, tinerf::Representation::neural) < kTol);
}

TEST_CASE("multi-seed backward equals gradient of the weighted total") {
  CHECK(grad_suite::check_multi_seed(kN, 116) < kTol);
}
