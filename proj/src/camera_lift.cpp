#include "t3dp/camera_lift.hpp"

#include <cmath>
#include <string>

namespace t3dp {

const std::array<const char*, kNumJoints> kJointNames{
    "pelvis",     "left_hip",   "right_hip",  "neck",       "left_knee",
    "right_knee", "head",       "left_ankle", "right_ankle", "left_shoulder",
    "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist"};

void CameraCrop::validate() const {
  const double vals[] = {image_w, image_h, center_x, center_y, box_size,
                         cam_scale, cam_tx, cam_ty, focal};
  for (double v : vals)
    if (!std::isfinite(v)) throw InputError("camera crop has non-finite parameters");
  if (cam_scale * box_size == 0.0)
    throw DegenerateCameraError("camera crop has s * b == 0");
  if (image_w <= 0.0 || image_h <= 0.0 || box_size <= 0.0 || cam_scale <= 0.0 ||
      focal <= 0.0)
    throw DegenerateCameraError("camera crop needs W, H, b, s, f > 0");
}

Vec3 lift_translation(const CameraCrop& crop) {
  crop.validate();
  const double sb = crop.cam_scale * crop.box_size;
  return {crop.cam_tx + (2.0 * crop.center_x - crop.image_w) / sb,
          crop.cam_ty + (2.0 * crop.center_y - crop.image_h) / sb,
          2.0 * crop.focal / sb};
}

Keypoints place_keypoints(const LocalKeypoints& local, Vec3 t) {
  Keypoints out;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const Vec3& p = local.joints[j];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw InputError("keypoint " + std::to_string(j) + " is not finite");
    out[j] = p + t;
  }
  return out;
}

std::vector<double> temporal_encode(std::int64_t frame, std::size_t dims) {
  if (frame < 0) throw InputError("temporal_encode needs frame >= 0");
  std::vector<double> enc(dims);
  const double t = static_cast<double>(frame);
  for (std::size_t k = 0; k < dims; ++k) {
    const std::size_t pair = k / 2;
    const double angle =
        t / std::pow(10000.0, static_cast<double>(2 * pair) / static_cast<double>(dims));
    enc[k] = (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
  }
  return enc;
}

std::array<double, kKeypointDim> flatten(const Keypoints& kps) {
  std::array<double, kKeypointDim> flat{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    flat[3 * j] = kps[j].x;
    flat[3 * j + 1] = kps[j].y;
    flat[3 * j + 2] = kps[j].z;
  }
  return flat;
}

Keypoints unflatten(std::span<const double> flat) {
  if (flat.size() != kKeypointDim)
    throw DimensionError("keypoints expect 45 values, got " + std::to_string(flat.size()));
  Keypoints k;
  for (std::size_t j = 0; j < kNumJoints; ++j)
    k[j] = {flat[3 * j], flat[3 * j + 1], flat[3 * j + 2]};
  return k;
}

SpaceTimeVec build_spacetime(const Keypoints& kps_view, std::int64_t frame, double z_norm) {
  if (!(z_norm > 0.0) || !std::isfinite(z_norm))
    throw ConfigError("z_norm must be positive and finite");
  std::vector<double> s;
  s.reserve(kSpaceTimeDim);
  for (double v : flatten(kps_view)) s.push_back(v / z_norm);
  const auto enc = temporal_encode(frame, kTemporalDim);
  s.insert(s.end(), enc.begin(), enc.end());
  return SpaceTimeVec(std::move(s));
}

}  // namespace t3dp
