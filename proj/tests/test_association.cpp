#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "t3dp/association.hpp"
#include "t3dp/error.hpp"

using namespace t3dp;

namespace {

FrameDetection det(std::size_t slot, double x, double y = 0.0) { return {slot, {x, y}}; }

Tracklet with_history(std::initializer_list<std::vector<double>> h) {
  Tracklet t;
  t.track_id = 1;
  t.history.assign(h.begin(), h.end());
  return t;
}

}  // namespace

TEST_CASE("affinity examples") {
  const TrackerConfig cfg;
  const std::vector<FrameDetection> dets{det(0, 0, 0), det(1, 100, 0), det(2, 3, 0)};
  const std::vector<Tracklet> tracks{with_history({{3, 0}, {0, 5}})};
  const Matrix a = affinity(dets, tracks, cfg);
  CHECK(a(0, 0) == 3.0);
  CHECK(a(1, 0) == 8.0);
  CHECK(a(2, 0) == 0.0);
  const std::vector<FrameDetection> wrong{{0, {1.0, 2.0, 3.0}}};
  CHECK_THROWS_AS(affinity(wrong, tracks, cfg), DimensionError);
}

TEST_CASE("cue selection restricts the distance") {
  TrackerConfig cfg;
  cfg.dims = AttributeDims{1, 1, 1};
  const Tracklet t = with_history({{0, 0, 0}});
  const std::vector<double> d{3, 4, 100};
  CHECK(track_distance(d, t, cfg) == doctest::Approx(std::sqrt(10025.0)));
  cfg.cues = CueSelection::from_betas({0.5, 0.5, 0.0});
  CHECK(track_distance(d, t, cfg) == 5.0);
  cfg.cues = CueSelection::from_betas({0, 0, 1});
  CHECK(track_distance(d, t, cfg) == 100.0);
}

TEST_CASE("spawn, match and reject") {
  Tracker tr;
  auto fa = tr.step(0, std::vector{det(0, 0), det(1, 50), det(2, 100)});
  CHECK(fa.matches.empty());
  REQUIRE(fa.new_tracks.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(fa.new_tracks[k].second == std::int64_t(k + 1));

  fa = tr.step(1, std::vector{det(0, 50)});
  REQUIRE(fa.matches.size() == 1);
  CHECK(fa.matches[0].second == 2);
  CHECK(fa.unmatched_tracks == std::vector<std::int64_t>{1, 3});
  const auto& t2 = *std::find_if(tr.tracks().begin(), tr.tracks().end(),
                                 [](const Tracklet& t) { return t.track_id == 2; });
  CHECK(t2.age == 0);
  CHECK(t2.history.size() == 2);
  CHECK(tr.tracks()[0].age == 1);

  // Distance exactly tau is capped to tau and therefore rejected.
  Tracker cap;
  cap.step(0, std::vector{det(0, 0)});
  fa = cap.step(1, std::vector{det(0, 8.0)});
  CHECK(fa.matches.empty());
  REQUIRE(fa.new_tracks.size() == 1);
  CHECK(fa.new_tracks[0].second == 2);
  CHECK(cap.tracks()[0].age == 1);
  // Just under the cap is accepted.
  fa = cap.step(2, std::vector{det(0, 7.999)});
  CHECK(fa.matches.size() == 1);

  CHECK_THROWS_AS(cap.step(2, {}), InputError);
  CHECK_THROWS_AS(cap.step(3, std::vector{det(1, 0), det(1, 5)}), InputError);
}

TEST_CASE("history cap and ageing") {
  Tracker tr;
  for (int f = 0; f < 30; ++f) tr.step(f, std::vector{det(0, 0.01 * f)});
  REQUIRE(tr.tracks().size() == 1);
  CHECK(tr.tracks()[0].history.size() == 20);
  CHECK(tr.tracks()[0].history.back()[0] == doctest::Approx(0.29));
  CHECK(tr.tracks()[0].history.front()[0] == doctest::Approx(0.10));

  for (int f = 30; f < 53; ++f) {
    tr.step(f, {});
    CHECK(tr.tracks().size() == 1);
    CHECK(tr.tracks()[0].age == std::size_t(f - 29));
  }
  const auto fa = tr.step(53, {});
  CHECK(fa.killed_tracks == std::vector<std::int64_t>{1});
  CHECK(tr.tracks().empty());
}

TEST_CASE("track over gaps") {
  auto run = [](int gap) {
    std::vector<FrameInput> frames;
    for (int f = 0; f < 4; ++f) frames.push_back({f, {det(0, 1.0)}});
    for (int f = 4 + gap; f < 8 + gap; ++f) frames.push_back({f, {det(0, 1.0)}});
    return track(frames, TrackerConfig{});
  };
  for (const auto& l : run(4).labels) CHECK(l.track_id == 1);
  for (const auto& l : run(23).labels) CHECK(l.track_id == 1);
  const auto r = run(24);
  CHECK(r.labels.front().track_id == 1);
  CHECK(r.labels.back().track_id == 2);

  std::vector<FrameInput> two;
  for (int f = 0; f < 10; ++f) two.push_back({f, {det(0, 0), det(1, 40)}});
  const auto t = track(two, TrackerConfig{});
  CHECK(t.tracklets.size() == 2);
  for (const auto& l : t.labels) CHECK(l.track_id == std::int64_t(l.slot + 1));
  CHECK(track(two, TrackerConfig{}).labels == t.labels);
}

TEST_CASE("config validation") {
  TrackerConfig c;
  c.tau = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.history_len = 0;
  CHECK_THROWS_AS(Tracker{c}, ConfigError);
}
