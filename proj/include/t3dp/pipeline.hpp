#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "t3dp/association.hpp"
#include "t3dp/detection.hpp"
#include "t3dp/metrics.hpp"
#include "t3dp/scene_sim.hpp"
#include "t3dp/transformer.hpp"

namespace t3dp {

// A clip of consecutive frames plus the det_key behind each token slot
// (empty for padding).
struct EmbeddedClip {
  ClipBatch batch;
  std::int64_t first_frame = 0;
  std::vector<std::string> keys;
};

struct EmbedOptions {
  std::size_t window = 8;
  double z_norm = kDefaultZNorm;
  // 0 = the largest number of detections in any frame.
  std::size_t max_people = 0;
};

/// Packs detections of frames [first_frame, first_frame + num_frames) into
/// ceil(num_frames / window) clips; slots follow det_key order within a frame.
std::vector<EmbeddedClip> embed_detections(std::span<const Detection> dets,
                                           std::int64_t first_frame, std::int64_t num_frames,
                                           const EmbedOptions& opts = {});

/// embed_detections over the scenario's full frame range.
std::vector<EmbeddedClip> embed(const Scenario& scenario, const EmbedOptions& opts = {});

struct TrackRecord {
  std::int64_t frame = 0;
  std::string det_key;
  std::int64_t track_id = 0;
  friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

struct TrackOptions {
  TrackerConfig tracker;
  AttentionConfig attention;
  EmbedOptions embed;
  // Null selects raw-token mode: the tracker sees the concatenated tokens
  // without spatio-temporal aggregation.
  const TransformerWeights* weights = nullptr;
};

/// Labels every detection with a track id; output ordered by (frame, det_key).
std::vector<TrackRecord> run_tracking(std::span<const Detection> dets,
                                      const TrackOptions& opts);

/// Outer join of ground truth (detections carrying gt_id) and predicted tracks
/// on (frame, det_key).
std::vector<LabeledDetection> join_labels(std::span<const Detection> ground_truth,
                                          std::span<const TrackRecord> tracks);

}  // namespace t3dp
