#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "t3dp/error.hpp"
#include "t3dp/hungarian.hpp"

using namespace t3dp;

TEST_CASE("small fixed cases") {
  Matrix one(1, 1);
  one(0, 0) = 4.5;
  auto a = hungarian(one);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.cost == 4.5);

  Matrix m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(1, 0) = 2;
  m(1, 1) = 1;
  a = hungarian(m);
  CHECK(a.cost == 2.0);
  CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});

  CHECK(hungarian(Matrix(0, 0)).pairs.empty());
  CHECK(hungarian(Matrix(0, 3)).pairs.empty());
  CHECK(hungarian(Matrix(3, 0)).cost == 0.0);

  Matrix bad(2, 2);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(hungarian(bad), InputError);
}

TEST_CASE("ties resolve towards lower indices") {
  Matrix flat(3, 3);
  flat.fill(1.0);
  const auto a = hungarian(flat);
  CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}, {2, 2}});
  CHECK(hungarian(flat).pairs == a.pairs);
}

TEST_CASE("rectangular matrices") {
  Matrix wide(2, 4);
  const double v[2][4] = {{5, 1, 9, 9}, {9, 9, 9, 2}};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) wide(r, c) = v[r][c];
  auto a = hungarian(wide);
  CHECK(a.cost == 3.0);
  CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 3}});

  Matrix tall(4, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) tall(c, r) = v[r][c];
  a = hungarian(tall);
  CHECK(a.cost == 3.0);
  CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}, {3, 1}});
}

TEST_CASE("matches brute force on random integer matrices") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = 1 + rng.below(6), c = 1 + rng.below(6);
    Matrix m(r, c);
    for (double& x : m.flat()) x = static_cast<double>(rng.below(20));
    const auto a = hungarian(m);
    CHECK(a.pairs.size() == std::min(r, c));
    double sum = 0;
    std::vector<char> rows(r, 0), cols(c, 0);
    for (auto [i, j] : a.pairs) {
      CHECK_FALSE(rows[i]);
      CHECK_FALSE(cols[j]);
      rows[i] = cols[j] = 1;
      sum += m(i, j);
    }
    CHECK(sum == a.cost);
    CHECK(a.cost == testing::brute_force_assignment(m));
  }
}
