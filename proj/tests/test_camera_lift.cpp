#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "t3dp/camera_lift.hpp"
#include "t3dp/rng.hpp"

using namespace t3dp;

namespace {

bool near(Vec3 a, Vec3 b, double tol = 1e-12) {
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol && std::abs(a.z - b.z) <= tol;
}

CameraCrop hand_crop() { return {1920, 1080, 1060, 640, 200, 0.5, 0.1, -0.2, 1000}; }

}  // namespace

TEST_CASE("lift_translation examples") {
  CHECK(near(lift_translation({1000, 1000, 500, 500, 2000, 1, 0, 0, 1000}), {0, 0, 1}));
  // (2*1060 - 1920) / (0.5 * 200) = 2, (2*640 - 1080) / 100 = 2, 2*1000 / 100 = 20
  CHECK(near(lift_translation(hand_crop()), {2.1, 1.8, 20.0}));

  CameraCrop c = hand_crop();
  const Vec3 base = lift_translation(c);
  c.focal *= 2;
  const Vec3 doubled = lift_translation(c);
  CHECK(doubled.x == base.x);
  CHECK(doubled.y == base.y);
  CHECK(doubled.z == 2 * base.z);
}

TEST_CASE("lift_translation rejects degenerate cameras") {
  CameraCrop c = hand_crop();
  c.cam_scale = 0;
  CHECK_THROWS_AS(lift_translation(c), DegenerateCameraError);
  c = hand_crop();
  c.box_size = -3;
  CHECK_THROWS_AS(lift_translation(c), DegenerateCameraError);
  c = hand_crop();
  c.center_x = INFINITY;
  CHECK_THROWS_AS(lift_translation(c), InputError);
}

TEST_CASE("lift_translation depends on s and b only through s*b") {
  Rng rng(5);
  const CameraCrop c = hand_crop();
  const Vec3 ref = lift_translation(c);
  for (int i = 0; i < 100; ++i) {
    const double k = std::exp(rng.uniform(-3, 3));
    CameraCrop d = c;
    d.cam_scale /= k;
    d.box_size *= k;
    CHECK(near(lift_translation(d), ref, 1e-12));
  }
}

TEST_CASE("place_keypoints") {
  LocalKeypoints local;
  for (std::size_t j = 0; j < kNumJoints; ++j) local.joints[j] = {double(j), 2.0 * j, -1.0};
  CHECK(place_keypoints(local, {0, 0, 0}) == local.joints);

  const auto b = place_keypoints(LocalKeypoints{}, {2.1, 1.8, 20.0});
  for (const auto& p : b) CHECK(p == Vec3{2.1, 1.8, 20.0});

  LocalKeypoints one;
  one.joints[0] = {1, 2, 3};
  CHECK(place_keypoints(one, {0.5, 0.5, 0.5})[0] == Vec3{1.5, 2.5, 3.5});

  SUBCASE("equivariance under composed translations") {
    // Dyadic values keep every sum exact.
    const Vec3 t1{0.25, -1.5, 3.0}, t2{2.0, 0.125, -0.5};
    LocalKeypoints again;
    again.joints = place_keypoints(local, t1);
    CHECK(place_keypoints(local, t1 + t2) == place_keypoints(again, t2));
  }
}

TEST_CASE("temporal_encode") {
  const auto e0 = temporal_encode(0);
  REQUIRE(e0.size() == 45);
  for (std::size_t k = 0; k < 45; ++k) CHECK(e0[k] == (k % 2 == 0 ? 0.0 : 1.0));
  const auto e1 = temporal_encode(1);
  CHECK(e1 != e0);
  CHECK(e1[0] == doctest::Approx(0.8414709848078965).epsilon(1e-15));
  // Index 44 is even: sin branch with pair index 22.
  CHECK(e1[44] == std::sin(1.0 / std::pow(10000.0, 44.0 / 45.0)));
  CHECK(temporal_encode(17) == temporal_encode(17));
  CHECK_THROWS_AS(temporal_encode(-1), InputError);
}

TEST_CASE("build_spacetime") {
  const auto z = build_spacetime(Keypoints{}, 0);
  for (std::size_t k = 0; k < 45; ++k) CHECK(z[k] == 0.0);
  const auto enc = temporal_encode(0);
  for (std::size_t k = 0; k < 45; ++k) CHECK(z[45 + k] == enc[k]);

  Keypoints ones;
  ones.fill({1, 1, 1});
  const auto o = build_spacetime(ones, 0, 1.0);
  for (std::size_t k = 0; k < 45; ++k) CHECK(o[k] == 1.0);

  Keypoints k{};
  k[0] = {2.1, 1.8, 20.0};
  const auto s = build_spacetime(k, 3, 10.0);
  CHECK(s[0] == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.18).epsilon(1e-15));
  CHECK(s[2] == 2.0);
  CHECK(s.values().size() == 90);
  const auto enc3 = temporal_encode(3);
  for (std::size_t i = 0; i < 45; ++i) CHECK(s[45 + i] == enc3[i]);
}
