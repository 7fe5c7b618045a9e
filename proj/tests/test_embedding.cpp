#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "t3dp/embedding.hpp"
#include "t3dp/rng.hpp"

using namespace t3dp;

TEST_CASE("concat_token places segments") {
  SUBCASE("zeros") {
    const auto h = concat_token(AppearanceVec{}, PoseVec{}, SpaceTimeVec{});
    CHECK(h.size() == kTokenDim);
    CHECK(std::all_of(h.begin(), h.end(), [](double x) { return x == 0.0; }));
  }
  SUBCASE("indicator of appearance") {
    const auto h = concat_token(AppearanceVec(std::vector<double>(512, 1.0)), PoseVec{},
                                SpaceTimeVec{});
    CHECK(std::accumulate(h.begin(), h.end(), 0.0) == 512.0);
    CHECK(h[511] == 1.0);
    CHECK(h[512] == 0.0);
  }
  SUBCASE("ramps") {
    std::vector<double> a(512), p(2048), s(90);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(p.begin(), p.end(), 1.0);
    std::iota(s.begin(), s.end(), 1.0);
    const auto h = concat_token(a, p, s);
    CHECK(h[512] == 1.0);
    CHECK(h[2560] == 1.0);
    CHECK(h[2649] == 90.0);
  }
  CHECK_THROWS_AS(concat_token(std::vector<double>(511), std::vector<double>(2048),
                               std::vector<double>(90)),
                  DimensionError);
}

TEST_CASE("split_token") {
  const auto z = split_token(std::vector<double>(kTokenDim, 0.0));
  CHECK(z.appearance == AppearanceVec{});
  std::vector<double> onehot(kTokenDim, 0.0);
  onehot[2560] = 1.0;
  const auto s = split_token(onehot);
  CHECK(s.spacetime[0] == 1.0);
  CHECK(s.appearance == AppearanceVec{});
  CHECK(s.pose == PoseVec{});
  CHECK_THROWS_AS(split_token(std::vector<double>(2649)), DimensionError);
}

TEST_CASE("split inverts concat bit-exactly on random tokens") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(512), p(2048), s(90);
    for (auto* v : {&a, &p, &s})
      for (double& x : *v) x = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    const auto parts = split_token(concat_token(a, p, s));
    CHECK(std::ranges::equal(parts.appearance.values(), a));
    CHECK(std::ranges::equal(parts.pose.values(), p));
    CHECK(std::ranges::equal(parts.spacetime.values(), s));
  }
}

TEST_CASE("fixed vectors reject bad input") {
  CHECK_THROWS_AS(AppearanceVec(std::vector<double>(10)), DimensionError);
  std::vector<double> v(90, 0.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(SpaceTimeVec{v}, InputError);
}

TEST_CASE("ClipBatch grid") {
  ClipBatch b(2, 3, AttributeDims{2, 2, 1});
  CHECK(b.num_tokens() == 6);
  CHECK(b.num_valid() == 0);
  CHECK_FALSE(b.has_identities());
  CHECK(b.identity(4) == kNoIdentity);
  b.set_token(1, 2, std::vector<double>{1, 2, 3, 4, 5}, 7);
  CHECK(b.index(1, 2) == 5);
  CHECK(b.valid(5));
  CHECK(b.identity(5) == 7);
  CHECK(b.token(5)[4] == 5.0);
  CHECK(b.token(0)[0] == 0.0);
  CHECK(b.has_identities());
  CHECK_THROWS_AS(b.set_token(2, 0, std::vector<double>(5), 1), DimensionError);
  CHECK_THROWS_AS(b.set_token(0, 0, std::vector<double>(4), 1), DimensionError);
  CHECK_THROWS_AS(ClipBatch(0, 1), DimensionError);
}
