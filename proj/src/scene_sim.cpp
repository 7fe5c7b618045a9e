#include "t3dp/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "t3dp/error.hpp"
#include "t3dp/rng.hpp"

namespace t3dp {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kTagIdentity = 1;
constexpr std::uint64_t kTagTrajectory = 2;
constexpr std::uint64_t kTagNoise = 3;
constexpr std::uint64_t kTagKeys = 4;
constexpr std::uint64_t kTagShot = 5;

std::vector<double> gaussian_vector(std::size_t n, double sigma, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = sigma * rng.normal();
  return v;
}

double reflect(double x, double lo, double hi, double& velocity) {
  if (x < lo) {
    velocity = -velocity;
    return lo + (lo - x);
  }
  if (x > hi) {
    velocity = -velocity;
    return hi - (x - hi);
  }
  return x;
}

// Triangle-wave fold of x into [lo, hi]; continuous, identity inside the range.
double fold(double x, double lo, double hi) {
  const double w = hi - lo;
  double y = std::fmod(x - lo, 2.0 * w);
  if (y < 0.0) y += 2.0 * w;
  return y <= w ? lo + y : lo + 2.0 * w - y;
}

Vec3 fold_into_box(Vec3 p) {
  return {fold(p.x, -kSimHalfWidth, kSimHalfWidth), fold(p.y, -kSimHalfWidth, kSimHalfWidth),
          fold(p.z, kSimMinDepth, kSimMaxDepth)};
}

Vec3 random_position(Rng& rng) {
  return {rng.uniform(-kSimHalfWidth, kSimHalfWidth), rng.uniform(-kSimHalfWidth, kSimHalfWidth),
          rng.uniform(kSimMinDepth, kSimMaxDepth)};
}

std::string key_for(std::size_t k) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "d%03zu", k);
  return buf;
}

}  // namespace

void SimConfig::validate() const {
  if (num_people < 1) throw ConfigError("num_people must be >= 1");
  if (num_frames < 1) throw ConfigError("num_frames must be >= 1");
  for (double s : {appearance_noise_sigma, pose_drift_sigma, appearance_scale, pose_scale,
                   walk_speed, shot_min_jump})
    if (!(s >= 0.0) || !std::isfinite(s))
      throw ConfigError("sigmas, scales and speeds must be finite and >= 0");
  if (!(image_w > 0.0) || !(image_h > 0.0) || !(focal > 0.0))
    throw ConfigError("image size and focal length must be positive");
  for (const auto& o : occlusions) {
    if (o.person < 0 || o.person >= num_people)
      throw ConfigError("occlusion names unknown person " + std::to_string(o.person));
    if (o.start_frame < 0 || o.length < 0 || o.start_frame + o.length > num_frames)
      throw ConfigError("occlusion window outside the scenario frames");
  }
  for (auto f : shot_changes)
    if (f < 0 || f >= num_frames) throw ConfigError("shot change frame out of range");
}

CameraCrop crop_for_position(Vec3 position, double image_w, double image_h, double focal) {
  CameraCrop c;
  c.image_w = image_w;
  c.image_h = image_h;
  c.focal = focal;
  c.cam_scale = 1.0;
  c.cam_tx = 0.0;
  c.cam_ty = 0.0;
  c.box_size = 2.0 * focal / position.z;
  c.center_x = 0.5 * (image_w + position.x * c.box_size);
  c.center_y = 0.5 * (image_h + position.y * c.box_size);
  return c;
}

LocalKeypoints canonical_skeleton() {
  // Metres, y down, z away from the camera; pelvis at the origin.
  LocalKeypoints s;
  s.joints = {{{0.0, 0.0, 0.0},    {-0.1, 0.05, 0.0},  {0.1, 0.05, 0.0},
               {0.0, -0.5, 0.0},   {-0.1, 0.45, 0.02}, {0.1, 0.45, 0.02},
               {0.0, -0.7, 0.0},   {-0.1, 0.85, 0.0},  {0.1, 0.85, 0.0},
               {-0.18, -0.48, 0.0}, {0.18, -0.48, 0.0}, {-0.25, -0.2, 0.03},
               {0.25, -0.2, 0.03}, {-0.28, 0.05, 0.05}, {0.28, 0.05, 0.05}}};
  return s;
}

Scenario generate(const SimConfig& cfg) {
  cfg.validate();
  const auto people = static_cast<std::size_t>(cfg.num_people);
  const auto frames = static_cast<std::size_t>(cfg.num_frames);

  std::set<std::pair<std::int64_t, std::int64_t>> hidden;  // (person, frame)
  for (const auto& o : cfg.occlusions)
    for (std::int64_t f = o.start_frame; f < o.start_frame + o.length; ++f)
      hidden.emplace(o.person, f);

  Rng id_rng(derive_seed(cfg.seed, kTagIdentity));
  std::vector<std::vector<double>> app_base(people), pose_state(people);
  std::vector<LocalKeypoints> skeletons(people);
  const LocalKeypoints canon = canonical_skeleton();
  for (std::size_t p = 0; p < people; ++p) {
    app_base[p] = gaussian_vector(kAppearanceDim, cfg.appearance_scale, id_rng);
    pose_state[p] = gaussian_vector(kPoseDim, cfg.pose_scale, id_rng);
    const double height = id_rng.uniform(0.9, 1.1);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const Vec3& c = canon.joints[j];
      skeletons[p].joints[j] = {c.x * height, c.y * height, c.z * height};
    }
  }

  Rng traj_rng(derive_seed(cfg.seed, kTagTrajectory));
  std::vector<Vec3> pos(people), vel(people);
  for (std::size_t p = 0; p < people; ++p) {
    pos[p] = random_position(traj_rng);
    const double heading = traj_rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    vel[p] = {cfg.walk_speed * std::cos(heading), 0.0, cfg.walk_speed * std::sin(heading)};
  }

  Rng noise_rng(derive_seed(cfg.seed, kTagNoise));
  Rng key_rng(derive_seed(cfg.seed, kTagKeys));
  Scenario sc;
  sc.config = cfg;
  for (std::size_t t = 0; t < frames; ++t) {
    if (t > 0) {
      for (std::size_t p = 0; p < people; ++p) {
        Vec3& x = pos[p];
        Vec3& v = vel[p];
        x = x + v;
        x.x = reflect(x.x, -kSimHalfWidth, kSimHalfWidth, v.x);
        x.y = reflect(x.y, -kSimHalfWidth, kSimHalfWidth, v.y);
        x.z = reflect(x.z, kSimMinDepth, kSimMaxDepth, v.z);
      }
    }
    // Noise is drawn for every person every frame, visible or not, so the
    // streams do not depend on the occlusion schedule.
    std::vector<Detection> frame_dets;
    for (std::size_t p = 0; p < people; ++p) {
      std::vector<double> app = app_base[p];
      if (cfg.appearance_noise_sigma > 0.0)
        for (double& a : app) a += cfg.appearance_noise_sigma * noise_rng.normal();
      if (t > 0 && cfg.pose_drift_sigma > 0.0)
        for (double& q : pose_state[p]) q += cfg.pose_drift_sigma * noise_rng.normal();
      if (hidden.contains({static_cast<std::int64_t>(p), static_cast<std::int64_t>(t)}))
        continue;
      Detection d;
      d.frame = static_cast<std::int64_t>(t);
      d.gt_id = static_cast<std::int64_t>(p);
      d.crop = crop_for_position(pos[p], cfg.image_w, cfg.image_h, cfg.focal);
      d.keypoints = skeletons[p];
      d.appearance = AppearanceVec(std::move(app));
      d.pose = PoseVec(pose_state[p]);
      frame_dets.push_back(std::move(d));
    }
    // Opaque per-frame keys in shuffled order so slot order carries no identity.
    std::vector<std::size_t> order(frame_dets.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    for (std::size_t k = order.size(); k > 1; --k)
      std::swap(order[k - 1], order[key_rng.below(k)]);
    for (std::size_t k = 0; k < frame_dets.size(); ++k)
      frame_dets[order[k]].det_key = key_for(k);
    std::sort(frame_dets.begin(), frame_dets.end(),
              [](const Detection& a, const Detection& b) { return a.det_key < b.det_key; });
    for (auto& d : frame_dets) sc.detections.push_back(std::move(d));
  }
  for (const auto& o : cfg.occlusions)
    sc.events.push_back("occlusion person=" + std::to_string(o.person) +
                        " start=" + std::to_string(o.start_frame) +
                        " length=" + std::to_string(o.length));

  for (auto f : cfg.shot_changes) sc = apply_shot_change(sc, f, derive_seed(cfg.seed, kTagShot));
  return sc;
}

Scenario apply_shot_change(const Scenario& scenario, std::int64_t frame, std::uint64_t seed) {
  const SimConfig& cfg = scenario.config;
  if (frame < 0 || frame >= cfg.num_frames)
    throw ConfigError("shot change frame " + std::to_string(frame) + " out of range");

  // Anchor of each person at the cut: position at the first visible frame >= cut.
  std::map<std::int64_t, Vec3> anchor;
  for (const auto& d : scenario.detections)
    if (d.frame >= frame && d.gt_id && !anchor.contains(*d.gt_id))
      anchor.emplace(*d.gt_id, lift_translation(d.crop));

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(frame)));
  std::map<std::int64_t, Vec3> jump;
  for (std::int64_t p = 0; p < cfg.num_people; ++p) {
    // Draw for every person so the stream is independent of visibility.
    Vec3 target = random_position(rng);
    auto it = anchor.find(p);
    if (it == anchor.end()) continue;
    Vec3 delta = target - it->second;
    for (int attempt = 0; attempt < 64; ++attempt) {
      if (std::hypot(delta.x, delta.y, delta.z) >= cfg.shot_min_jump) break;
      target = random_position(rng);
      delta = target - it->second;
    }
    jump.emplace(p, delta);
  }

  Scenario out = scenario;
  for (auto& d : out.detections) {
    if (d.frame < frame || !d.gt_id) continue;
    const Vec3 moved = fold_into_box(lift_translation(d.crop) + jump.at(*d.gt_id));
    d.crop = crop_for_position(moved, d.crop.image_w, d.crop.image_h, d.crop.focal);
  }
  out.events.push_back("shot_change frame=" + std::to_string(frame));
  return out;
}

}  // namespace t3dp
