#include "t3dp/pipeline.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "t3dp/error.hpp"

namespace t3dp {

std::vector<double> detection_token(const Detection& d, double z_norm) {
  const Vec3 t = lift_translation(d.crop);
  const SpaceTimeVec s = build_spacetime(place_keypoints(d.keypoints, t), d.frame, z_norm);
  return concat_token(d.appearance, d.pose, s);
}

namespace {

// Detections grouped by frame, each group sorted by det_key.
std::map<std::int64_t, std::vector<const Detection*>> by_frame(std::span<const Detection> dets) {
  std::map<std::int64_t, std::vector<const Detection*>> frames;
  for (const auto& d : dets) frames[d.frame].push_back(&d);
  for (auto& [f, group] : frames) {
    std::sort(group.begin(), group.end(),
              [](const Detection* a, const Detection* b) { return a->det_key < b->det_key; });
    for (std::size_t k = 1; k < group.size(); ++k)
      if (group[k - 1]->det_key == group[k]->det_key)
        throw InputError("det_key '" + group[k]->det_key + "' repeated in frame " +
                         std::to_string(f));
  }
  return frames;
}

}  // namespace

std::vector<EmbeddedClip> embed_detections(std::span<const Detection> dets,
                                           std::int64_t first_frame, std::int64_t num_frames,
                                           const EmbedOptions& opts) {
  if (opts.window == 0) throw ConfigError("embedding window must be >= 1");
  if (num_frames < 1) throw ConfigError("embedding needs at least one frame");
  const auto frames = by_frame(dets);
  std::size_t people = opts.max_people;
  if (people == 0) {
    people = 1;
    for (const auto& [f, group] : frames) people = std::max(people, group.size());
  }

  std::vector<EmbeddedClip> clips;
  const auto window = static_cast<std::int64_t>(opts.window);
  for (std::int64_t start = first_frame; start < first_frame + num_frames; start += window) {
    const std::int64_t len = std::min(window, first_frame + num_frames - start);
    EmbeddedClip clip{ClipBatch(static_cast<std::size_t>(len), people), start,
                      std::vector<std::string>(static_cast<std::size_t>(len) * people)};
    for (std::int64_t t = 0; t < len; ++t) {
      auto it = frames.find(start + t);
      if (it == frames.end()) continue;
      if (it->second.size() > people)
        throw InputError("frame " + std::to_string(start + t) + " has more than " +
                         std::to_string(people) + " detections");
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        const Detection& d = *it->second[i];
        const auto tt = static_cast<std::size_t>(t);
        clip.batch.set_token(tt, i, detection_token(d, opts.z_norm),
                             d.gt_id.value_or(kNoIdentity));
        clip.keys[clip.batch.index(tt, i)] = d.det_key;
      }
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

std::vector<EmbeddedClip> embed(const Scenario& scenario, const EmbedOptions& opts) {
  return embed_detections(scenario.detections, 0, scenario.config.num_frames, opts);
}

std::vector<TrackRecord> run_tracking(std::span<const Detection> dets,
                                      const TrackOptions& opts) {
  if (dets.empty()) return {};
  const auto frames = by_frame(dets);
  const std::int64_t first = frames.begin()->first;
  const std::int64_t count = frames.rbegin()->first - first + 1;

  std::vector<FrameInput> inputs;
  std::map<std::pair<std::int64_t, std::size_t>, std::string> slot_keys;
  if (opts.weights == nullptr) {
    for (const auto& [f, group] : frames) {
      FrameInput in{f, {}};
      for (std::size_t i = 0; i < group.size(); ++i) {
        in.detections.push_back({i, detection_token(*group[i], opts.embed.z_norm)});
        slot_keys[{f, i}] = group[i]->det_key;
      }
      inputs.push_back(std::move(in));
    }
  } else {
    for (const auto& clip : embed_detections(dets, first, count, opts.embed)) {
      if (clip.batch.num_valid() == 0) continue;
      const Matrix out = forward(clip.batch, *opts.weights, opts.attention);
      for (std::size_t t = 0; t < clip.batch.num_frames(); ++t) {
        FrameInput in{clip.first_frame + static_cast<std::int64_t>(t), {}};
        for (std::size_t i = 0; i < clip.batch.max_people(); ++i) {
          const std::size_t n = clip.batch.index(t, i);
          if (!clip.batch.valid(n)) continue;
          const auto row = out.row(n);
          in.detections.push_back({i, std::vector<double>(row.begin(), row.end())});
          slot_keys[{in.frame, i}] = clip.keys[n];
        }
        if (!in.detections.empty()) inputs.push_back(std::move(in));
      }
    }
  }

  const TrackResult result = track(inputs, opts.tracker);
  std::vector<TrackRecord> records;
  records.reserve(result.labels.size());
  for (const auto& l : result.labels)
    records.push_back({l.frame, slot_keys.at({l.frame, l.slot}), l.track_id});
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.det_key) < std::tie(b.frame, b.det_key);
  });
  return records;
}

std::vector<LabeledDetection> join_labels(std::span<const Detection> ground_truth,
                                          std::span<const TrackRecord> tracks) {
  std::map<std::pair<std::int64_t, std::string>, LabeledDetection> joined;
  for (const auto& d : ground_truth) {
    auto& l = joined[{d.frame, d.det_key}];
    l.frame = d.frame;
    l.det_key = d.det_key;
    l.gt_id = d.gt_id;
  }
  for (const auto& t : tracks) {
    auto& l = joined[{t.frame, t.det_key}];
    if (l.pred_id) throw InputError("track record repeated for " + t.det_key);
    l.frame = t.frame;
    l.det_key = t.det_key;
    l.pred_id = t.track_id;
  }
  std::vector<LabeledDetection> out;
  out.reserve(joined.size());
  for (auto& [k, l] : joined) out.push_back(std::move(l));
  return out;
}

}  // namespace t3dp
