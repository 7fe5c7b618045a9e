#include "t3dp/embedding.hpp"

#include <algorithm>

namespace t3dp {

std::size_t AttributeDims::size(Attribute a) const noexcept {
  switch (a) {
    case Attribute::app: return app;
    case Attribute::pose: return pose;
    case Attribute::loc: return loc;
  }
  return 0;
}

std::size_t AttributeDims::offset(Attribute a) const noexcept {
  switch (a) {
    case Attribute::app: return 0;
    case Attribute::pose: return app;
    case Attribute::loc: return app + pose;
  }
  return 0;
}

std::string to_string(Attribute a) {
  switch (a) {
    case Attribute::app: return "app";
    case Attribute::pose: return "pose";
    case Attribute::loc: return "loc";
  }
  return "?";
}

std::vector<double> concat_token(std::span<const double> appearance,
                                 std::span<const double> pose,
                                 std::span<const double> spacetime) {
  if (appearance.size() != kAppearanceDim || pose.size() != kPoseDim ||
      spacetime.size() != kSpaceTimeDim)
    throw DimensionError("concat_token expects segment lengths 512/2048/90, got " +
                         std::to_string(appearance.size()) + "/" +
                         std::to_string(pose.size()) + "/" +
                         std::to_string(spacetime.size()));
  std::vector<double> h;
  h.reserve(kTokenDim);
  h.insert(h.end(), appearance.begin(), appearance.end());
  h.insert(h.end(), pose.begin(), pose.end());
  h.insert(h.end(), spacetime.begin(), spacetime.end());
  return h;
}

std::vector<double> concat_token(const AppearanceVec& a, const PoseVec& p,
                                 const SpaceTimeVec& s) {
  return concat_token(a.values(), p.values(), s.values());
}

SplitToken split_token(std::span<const double> h) {
  if (h.size() != kTokenDim)
    throw DimensionError("split_token expects length 2650, got " +
                         std::to_string(h.size()));
  auto take = [&](std::size_t off, std::size_t n) {
    return std::vector<double>(h.begin() + off, h.begin() + off + n);
  };
  return SplitToken{AppearanceVec(take(0, kAppearanceDim)),
                    PoseVec(take(kAppearanceDim, kPoseDim)),
                    SpaceTimeVec(take(kAppearanceDim + kPoseDim, kSpaceTimeDim))};
}

ClipBatch::ClipBatch(std::size_t num_frames, std::size_t max_people, AttributeDims dims)
    : num_frames_(num_frames),
      max_people_(max_people),
      dims_(dims),
      tokens_(num_frames * max_people, dims.total()),
      valid_(num_frames * max_people, 0),
      identities_(num_frames * max_people, kNoIdentity) {
  if (num_frames == 0 || max_people == 0)
    throw DimensionError("ClipBatch needs T >= 1 and P >= 1");
}

std::size_t ClipBatch::index(std::size_t frame, std::size_t slot) const {
  if (frame >= num_frames_ || slot >= max_people_)
    throw DimensionError("ClipBatch index (" + std::to_string(frame) + ", " +
                         std::to_string(slot) + ") out of range");
  return frame * max_people_ + slot;
}

void ClipBatch::set_token(std::size_t frame, std::size_t slot, std::span<const double> h,
                          std::int64_t identity) {
  const std::size_t n = index(frame, slot);
  if (h.size() != dims_.total())
    throw DimensionError("token length " + std::to_string(h.size()) +
                         " does not match clip width " + std::to_string(dims_.total()));
  if (!all_finite(h)) throw InputError("token contains non-finite entries");
  std::copy(h.begin(), h.end(), tokens_.row(n).begin());
  valid_[n] = 1;
  identities_[n] = identity;
}

void ClipBatch::set_token(const HumanToken& token, std::int64_t identity) {
  if (!token.valid) return;
  set_token(static_cast<std::size_t>(token.frame), token.slot,
            concat_token(token.appearance, token.pose, token.spacetime), identity);
}

bool ClipBatch::has_identities() const noexcept {
  for (std::size_t n = 0; n < valid_.size(); ++n)
    if (valid_[n] && identities_[n] != kNoIdentity) return true;
  return false;
}

std::size_t ClipBatch::num_valid() const noexcept {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1));
}

}  // namespace t3dp
