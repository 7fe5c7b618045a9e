#pragma once

// File formats.
//
// Detections, JSON-Lines: one object per line
//   {"frame": int, "det_key": str, "gt_id": int|null,
//    "crop": [W, H, c_x, c_y, b, s, t_x, t_y, f],
//    "keypoints": [45 reals, joint-major x y z in kJointNames order],
//    "appearance": [512 reals], "pose": [2048 reals]}
//
// Detections, binary twin (little-endian):
//   "T3DD" u32 version u64 count, then per record
//   i64 frame, u32 key_len, key bytes, u8 has_gt, i64 gt_id,
//   f64 x (9 + 45 + 512 + 2048), and a trailing u32 CRC-32 of the records.
//
// Tracks, JSON-Lines: {"frame": int, "det_key": str, "track_id": int}
//
// Weights (little-endian):
//   "T3DP" u32 version, u64 app, u64 pose, u64 loc, u64 blocks,
//   f64 beta_app, f64 beta_pose, f64 beta_loc, u64 payload_count,
//   f64 x payload_count in for_each_tensor order, u32 CRC-32 of the payload.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "t3dp/detection.hpp"
#include "t3dp/metrics.hpp"
#include "t3dp/pipeline.hpp"
#include "t3dp/scene_sim.hpp"
#include "t3dp/transformer.hpp"

namespace t3dp::io {

inline constexpr std::uint32_t kDetectionsVersion = 1;
inline constexpr std::uint32_t kWeightsVersion = 1;

enum class DetectionFormat { jsonl, binary };

/// Reads either format (binary is recognized by its magic). Records come back
/// sorted by (frame, det_key). Errors name the line (JSON-Lines) or record.
std::vector<Detection> read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const std::vector<Detection>& dets,
                      DetectionFormat format = DetectionFormat::jsonl);

std::string detection_to_json_line(const Detection& d);
Detection detection_from_json_line(const std::string& line, std::size_t line_no);

std::vector<TrackRecord> read_tracks(const std::filesystem::path& path);
void write_tracks(const std::filesystem::path& path, std::vector<TrackRecord> tracks);

struct WeightsFile {
  TransformerWeights weights;
  AttentionConfig attention;
};

void save_weights(const std::filesystem::path& path, const TransformerWeights& w,
                  const AttentionConfig& attention = {});
/// When `expected` is given, a file with other attribute dims is rejected with
/// DimensionError.
WeightsFile load_weights(const std::filesystem::path& path,
                         const std::optional<AttributeDims>& expected = std::nullopt);

SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& cfg);

std::string metrics_to_json(const MetricReport& r);
MetricReport metrics_from_json(const std::string& text);

}  // namespace t3dp::io
