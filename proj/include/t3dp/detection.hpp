#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "t3dp/camera_lift.hpp"
#include "t3dp/embedding.hpp"

namespace t3dp {

// One detected person as delivered by the upstream mesh/appearance model:
// crop + camera, person-centric keypoints, and the two learned embeddings.
struct Detection {
  std::int64_t frame = 0;
  std::string det_key;
  std::optional<std::int64_t> gt_id;
  CameraCrop crop;
  LocalKeypoints keypoints;
  AppearanceVec appearance;
  PoseVec pose;
};

/// Lifts the crop, places the keypoints in view space and assembles the
/// 2650-d token. `frame` feeds the temporal encoding.
std::vector<double> detection_token(const Detection& d, double z_norm = kDefaultZNorm);

}  // namespace t3dp
