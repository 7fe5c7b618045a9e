#include "t3dp/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "t3dp/error.hpp"
#include "t3dp/hungarian.hpp"
#include "t3dp/kernels.hpp"

namespace t3dp {

bool CueSelection::uses(Attribute a) const noexcept {
  switch (a) {
    case Attribute::app: return app;
    case Attribute::pose: return pose;
    case Attribute::loc: return loc;
  }
  return false;
}

CueSelection CueSelection::from_betas(const AttentionConfig& cfg) {
  return {cfg.beta_app > 0.0, cfg.beta_pose > 0.0, cfg.beta_loc > 0.0};
}

void TrackerConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be > 0");
  if (history_len < 1) throw ConfigError("history_len must be >= 1");
  if (max_age < 1) throw ConfigError("max_age must be >= 1");
  if (!cues.app && !cues.pose && !cues.loc)
    throw ConfigError("at least one cue must be enabled");
}

double track_distance(std::span<const double> det, const Tracklet& track,
                      const TrackerConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : track.history) {
    if (h.size() != det.size())
      throw DimensionError("detection embedding length " + std::to_string(det.size()) +
                           " differs from track history length " +
                           std::to_string(h.size()));
    double sq = 0.0;
    if (cfg.cues.all()) {
      sq = kernels::squared_distance(det, h);
    } else {
      if (det.size() != cfg.dims.total())
        throw DimensionError("cue-restricted distance needs embeddings of width " +
                             std::to_string(cfg.dims.total()));
      const std::span<const double> hs(h);
      for (Attribute a : kAttributes) {
        if (!cfg.cues.uses(a)) continue;
        const auto off = cfg.dims.offset(a), len = cfg.dims.size(a);
        sq += kernels::squared_distance(det.subspan(off, len), hs.subspan(off, len));
      }
    }
    best = std::min(best, std::sqrt(sq));
  }
  return best;
}

Matrix affinity(std::span<const FrameDetection> dets, std::span<const Tracklet> tracks,
                const TrackerConfig& cfg) {
  Matrix cost(dets.size(), tracks.size());
  for (std::size_t i = 0; i < dets.size(); ++i)
    for (std::size_t j = 0; j < tracks.size(); ++j)
      cost(i, j) = std::min(cfg.tau, track_distance(dets[i].embedding, tracks[j], cfg));
  return cost;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

FrameAssignment Tracker::step(std::int64_t frame, std::span<const FrameDetection> dets) {
  if (frame <= last_frame_)
    throw InputError("frames must be strictly increasing (got " + std::to_string(frame) +
                     " after " + std::to_string(last_frame_) + ")");
  std::set<std::size_t> slots;
  for (const auto& d : dets) {
    if (!slots.insert(d.slot).second)
      throw InputError("duplicate detection slot " + std::to_string(d.slot) + " in frame " +
                       std::to_string(frame));
    if (!all_finite(d.embedding)) throw InputError("detection embedding is not finite");
  }
  last_frame_ = frame;

  const Matrix cost = affinity(dets, tracks_, cfg_);
  const Assignment assignment = hungarian(cost);

  FrameAssignment out;
  std::vector<char> det_matched(dets.size(), 0), track_matched(tracks_.size(), 0);
  for (const auto& [i, j] : assignment.pairs) {
    if (cost(i, j) >= cfg_.tau) continue;
    det_matched[i] = 1;
    track_matched[j] = 1;
    Tracklet& tr = tracks_[j];
    tr.history.push_back(dets[i].embedding);
    while (tr.history.size() > cfg_.history_len) tr.history.pop_front();
    tr.age = 0;
    tr.last_frame = frame;
    out.matches.emplace_back(dets[i].slot, tr.track_id);
  }
  for (std::size_t j = 0; j < tracks_.size(); ++j) {
    if (track_matched[j]) continue;
    tracks_[j].age += 1;
    out.unmatched_tracks.push_back(tracks_[j].track_id);
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (det_matched[i]) continue;
    Tracklet tr;
    tr.track_id = next_id_++;
    tr.history.push_back(dets[i].embedding);
    tr.born_frame = frame;
    tr.last_frame = frame;
    out.new_tracks.emplace_back(dets[i].slot, tr.track_id);
    tracks_.push_back(std::move(tr));
  }
  std::erase_if(tracks_, [&](const Tracklet& tr) {
    if (tr.age < cfg_.max_age) return false;
    out.killed_tracks.push_back(tr.track_id);
    return true;
  });
  std::sort(out.matches.begin(), out.matches.end());
  return out;
}

TrackResult track(std::span<const FrameInput> frames, const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  TrackResult result;
  std::int64_t prev = -1;
  for (const auto& f : frames) {
    if (f.frame <= prev)
      throw InputError("frames must be strictly increasing (got " + std::to_string(f.frame) +
                       " after " + std::to_string(prev) + ")");
    for (std::int64_t skipped = prev + 1; prev >= 0 && skipped < f.frame; ++skipped)
      tracker.step(skipped, {});
    const FrameAssignment fa = tracker.step(f.frame, f.detections);
    for (const auto& [slot, id] : fa.matches) result.labels.push_back({f.frame, slot, id});
    for (const auto& [slot, id] : fa.new_tracks) result.labels.push_back({f.frame, slot, id});
    prev = f.frame;
  }
  std::sort(result.labels.begin(), result.labels.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.slot) < std::tie(b.frame, b.slot);
  });
  result.tracklets = tracker.tracks();
  return result;
}

}  // namespace t3dp
