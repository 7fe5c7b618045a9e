#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "t3dp/detection.hpp"

namespace t3dp {

struct Occlusion {
  std::int64_t person = 0;
  std::int64_t start_frame = 0;
  std::int64_t length = 0;
};

struct SimConfig {
  std::int64_t num_people = 5;
  std::int64_t num_frames = 100;
  std::uint64_t seed = 0;
  double appearance_noise_sigma = 0.0;
  double pose_drift_sigma = 0.0;
  double walk_speed = 0.05;  // view units per frame
  std::vector<Occlusion> occlusions;
  std::vector<std::int64_t> shot_changes;
  double image_w = 1920.0;
  double image_h = 1080.0;
  double focal = kDefaultFocal;
  // Per-coordinate standard deviation of the identity bases.
  double appearance_scale = 1.0;
  double pose_scale = 1.0;
  // Smallest per-person jump of the 3D position at a shot change.
  double shot_min_jump = 2.0;

  void validate() const;
};

// View-space box the walkers stay in (reflective bounds).
inline constexpr double kSimHalfWidth = 5.0;
inline constexpr double kSimMinDepth = 5.0;
inline constexpr double kSimMaxDepth = 25.0;

struct Scenario {
  SimConfig config;
  std::vector<Detection> detections;  // ordered by (frame, det_key)
  std::vector<std::string> events;
};

/// Deterministic in cfg (including seed). Shot changes listed in the config are
/// applied in order.
Scenario generate(const SimConfig& cfg);

/// Redraws every person's 3D position from `frame` on, keeping appearance and
/// pose streams untouched. Positions after the cut follow the same motion,
/// shifted by one random jump per person (at least cfg.shot_min_jump) and
/// folded back into the simulation box.
Scenario apply_shot_change(const Scenario& scenario, std::int64_t frame, std::uint64_t seed);

/// Inverse of lift_translation with s = 1 and t = 0: b = 2 f / z and the crop
/// center is the pinhole projection of the position.
CameraCrop crop_for_position(Vec3 position, double image_w, double image_h, double focal);

/// Canonical person-centric skeleton in kJointNames order.
LocalKeypoints canonical_skeleton();

}  // namespace t3dp
