#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "t3dp/embedding.hpp"

namespace t3dp {

inline constexpr double kDefaultFocal = 5000.0;
inline constexpr double kDefaultZNorm = 10.0;
inline constexpr std::size_t kNumJoints = 15;
inline constexpr std::size_t kKeypointDim = kNumJoints * 3;
inline constexpr std::size_t kTemporalDim = 45;

// Square crop around a detection plus the weak-perspective camera predicted
// for it. All lengths in pixels except cam_scale (unitless) and cam_tx/ty
// (crop-normalized).
struct CameraCrop {
  double image_w = 0.0;
  double image_h = 0.0;
  double center_x = 0.0;
  double center_y = 0.0;
  double box_size = 0.0;
  double cam_scale = 1.0;
  double cam_tx = 0.0;
  double cam_ty = 0.0;
  double focal = kDefaultFocal;

  /// Throws DegenerateCameraError / InputError if the crop is unusable.
  void validate() const;

  friend bool operator==(const CameraCrop&, const CameraCrop&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// 15 joints in person-centric, view-aligned coordinates. Joint order is fixed
// by kJointNames; row-major (x, y, z) within each joint when flattened.
using Keypoints = std::array<Vec3, kNumJoints>;

struct LocalKeypoints {
  Keypoints joints{};
};

extern const std::array<const char*, kNumJoints> kJointNames;

/// View-space translation of a weak-perspective crop:
///   T = [t_x + (2 c_x - W) / (s b),  t_y + (2 c_y - H) / (s b),  2 f / (s b)]
Vec3 lift_translation(const CameraCrop& crop);

Keypoints place_keypoints(const LocalKeypoints& local, Vec3 t);

/// Sinusoidal encoding of a frame index; even index 2i -> sin(t / 10000^(2i/dims)),
/// odd index 2i+1 -> cos of the same angle.
std::vector<double> temporal_encode(std::int64_t frame, std::size_t dims = kTemporalDim);

SpaceTimeVec build_spacetime(const Keypoints& kps_view, std::int64_t frame,
                             double z_norm = kDefaultZNorm);

std::array<double, kKeypointDim> flatten(const Keypoints& kps);
Keypoints unflatten(std::span<const double> flat);

}  // namespace t3dp
