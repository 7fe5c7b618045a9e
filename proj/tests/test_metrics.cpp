#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "t3dp/error.hpp"
#include "t3dp/metrics.hpp"

using namespace t3dp;

namespace {

using Seq = std::vector<LabeledDetection>;

Seq single_track(const std::vector<std::optional<std::int64_t>>& preds) {
  Seq s;
  for (std::size_t f = 0; f < preds.size(); ++f) s.push_back({std::int64_t(f), "a", 7, preds[f]});
  return s;
}

}  // namespace

TEST_CASE("hand scenarios") {
  const Seq perfect = single_track({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(count_id_switches(perfect) == 0);
  CHECK(compute_mota(perfect) == 1.0);
  CHECK(compute_idf1(perfect) == 1.0);

  const Seq split = single_track({1, 1, 1, 1, 1, 2, 2, 2, 2, 2});
  const MetricReport r = evaluate(split);
  CHECK(r.id_switches == 1);
  CHECK(r.mota == 0.9);
  CHECK(r.idtp == 5);
  CHECK(r.idfp == 5);
  CHECK(r.idfn == 5);
  CHECK(r.idf1 == 0.5);

  CHECK(count_id_switches(single_track({1, 2, 1, 2})) == 3);
  CHECK(count_id_switches(single_track({1, std::nullopt, std::nullopt, 1})) == 0);
  CHECK(count_id_switches(single_track({1, std::nullopt, 2})) == 1);

  const Seq missing = single_track(std::vector<std::optional<std::int64_t>>(10));
  CHECK(compute_mota(missing) == 0.0);
  CHECK(compute_idf1(missing) == 0.0);

  Seq fp = perfect;
  fp.push_back({3, "extra", std::nullopt, 9});
  const MetricReport rf = evaluate(fp);
  CHECK(rf.fp == 1);
  CHECK(rf.mota == 0.9);

  CHECK_THROWS_AS(compute_mota(Seq{{0, "x", std::nullopt, 1}}), UndefinedMetricError);
  CHECK_THROWS_AS(evaluate(Seq{{0, "x", 1, 1}, {0, "x", 2, 2}}), InputError);
}

TEST_CASE("disjoint ids share nothing") {
  Seq s{{0, "a", 1, std::nullopt}, {0, "b", std::nullopt, 5}};
  CHECK(compute_idf1(s) == 0.0);
}

TEST_CASE("random instances: relabel invariance and brute-force idf1") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t ng = 1 + rng.below(5), np = 1 + rng.below(5);
    Seq s;
    for (int f = 0; f < 12; ++f)
      for (int k = 0; k < 4; ++k) {
        LabeledDetection d{f, "k" + std::to_string(k), std::nullopt, std::nullopt};
        if (rng.uniform() < 0.8) d.gt_id = std::int64_t(rng.below(ng));
        if (rng.uniform() < 0.8) d.pred_id = 100 + std::int64_t(rng.below(np));
        if (d.gt_id || d.pred_id) s.push_back(d);
      }
    if (s.empty()) continue;
    const MetricReport r = evaluate(s);
    CHECK(r.idf1 >= 0.0);
    CHECK(r.idf1 <= 1.0);
    CHECK(r.idf1 == doctest::Approx(testing::brute_force_idf1(s)).epsilon(1e-15));

    Seq relabeled = s;
    for (auto& d : relabeled)
      if (d.pred_id) d.pred_id = 1000 - *d.pred_id * 3;
    const MetricReport rr = evaluate(relabeled);
    CHECK(rr.id_switches == r.id_switches);
    CHECK(rr.idf1 == r.idf1);
    if (r.num_gt > 0) CHECK(rr.mota == r.mota);
  }
}
