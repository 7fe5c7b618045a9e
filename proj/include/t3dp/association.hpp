#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "t3dp/embedding.hpp"
#include "t3dp/tensor.hpp"
#include "t3dp/transformer.hpp"

namespace t3dp {

// Which token segments enter the detection-to-track distance. Switching a cue
// off removes it from the distance entirely (cue ablation); with every cue on
// the distance is the plain L2 norm over the whole embedding.
struct CueSelection {
  bool app = true;
  bool pose = true;
  bool loc = true;

  bool all() const noexcept { return app && pose && loc; }
  bool uses(Attribute a) const noexcept;
  /// Cues with a positive attention weight.
  static CueSelection from_betas(const AttentionConfig& cfg);
};

struct TrackerConfig {
  double tau = 8.0;
  std::size_t history_len = 20;
  std::size_t max_age = 24;
  CueSelection cues;
  // Segment layout of the embeddings; only consulted when a cue is switched off.
  AttributeDims dims;

  void validate() const;
};

struct Tracklet {
  std::int64_t track_id = 0;
  std::deque<std::vector<double>> history;  // most recent last
  std::size_t age = 0;
  std::int64_t born_frame = 0;
  std::int64_t last_frame = 0;
};

struct FrameDetection {
  std::size_t slot = 0;
  std::vector<double> embedding;
};

struct FrameAssignment {
  std::vector<std::pair<std::size_t, std::int64_t>> matches;     // (slot, track_id)
  std::vector<std::pair<std::size_t, std::int64_t>> new_tracks;  // (slot, track_id)
  std::vector<std::int64_t> unmatched_tracks;
  std::vector<std::int64_t> killed_tracks;
};

/// Distance between a detection and a tracklet: the smallest cue-restricted L2
/// distance to any history entry.
double track_distance(std::span<const double> det, const Tracklet& track,
                      const TrackerConfig& cfg);

/// |dets| x |tracks| matrix of min(tau, track_distance).
Matrix affinity(std::span<const FrameDetection> dets, std::span<const Tracklet> tracks,
                const TrackerConfig& cfg);

// Online tracker state. Tracks are kept in creation order; ids start at 1 and
// are never reused.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  FrameAssignment step(std::int64_t frame, std::span<const FrameDetection> dets);

  const std::vector<Tracklet>& tracks() const noexcept { return tracks_; }
  const TrackerConfig& config() const noexcept { return cfg_; }
  std::int64_t next_id() const noexcept { return next_id_; }

 private:
  TrackerConfig cfg_;
  std::vector<Tracklet> tracks_;
  std::int64_t next_id_ = 1;
  std::int64_t last_frame_ = -1;
};

struct FrameInput {
  std::int64_t frame = 0;
  std::vector<FrameDetection> detections;
};

struct TrackLabel {
  std::int64_t frame = 0;
  std::size_t slot = 0;
  std::int64_t track_id = 0;
  friend bool operator==(const TrackLabel&, const TrackLabel&) = default;
};

struct TrackResult {
  std::vector<TrackLabel> labels;  // ordered by (frame, slot)
  std::vector<Tracklet> tracklets;  // live at the end of the sequence
};

/// Folds Tracker::step over strictly increasing frames. Frame numbers skipped
/// by the input are stepped with no detections so ages count real frames.
TrackResult track(std::span<const FrameInput> frames, const TrackerConfig& cfg);

}  // namespace t3dp
