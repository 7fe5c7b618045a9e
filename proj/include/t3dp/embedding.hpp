#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "t3dp/error.hpp"
#include "t3dp/tensor.hpp"

namespace t3dp {

inline constexpr std::size_t kAppearanceDim = 512;
inline constexpr std::size_t kPoseDim = 2048;
inline constexpr std::size_t kSpaceTimeDim = 90;
inline constexpr std::size_t kTokenDim = kAppearanceDim + kPoseDim + kSpaceTimeDim;

// Ground-truth identity carried by padding slots.
inline constexpr std::int64_t kNoIdentity = -1;

enum class Attribute : std::size_t { app = 0, pose = 1, loc = 2 };
inline constexpr std::array<Attribute, 3> kAttributes{Attribute::app, Attribute::pose,
                                                      Attribute::loc};

// Widths of the three token segments. Production is 512/2048/90; tests shrink
// them so finite-difference checks stay cheap.
struct AttributeDims {
  std::size_t app = kAppearanceDim;
  std::size_t pose = kPoseDim;
  std::size_t loc = kSpaceTimeDim;

  std::size_t total() const noexcept { return app + pose + loc; }
  std::size_t size(Attribute a) const noexcept;
  std::size_t offset(Attribute a) const noexcept;

  friend bool operator==(const AttributeDims&, const AttributeDims&) = default;
};

std::string to_string(Attribute a);

// Fixed-length embedding. Length and finiteness are checked on construction.
template <std::size_t N, class Tag>
class FixedVec {
 public:
  static constexpr std::size_t kSize = N;

  FixedVec() : values_(N, 0.0) {}
  explicit FixedVec(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() != N)
      throw DimensionError(std::string(Tag::kName) + " expects length " +
                           std::to_string(N) + ", got " +
                           std::to_string(values_.size()));
    if (!all_finite(values_))
      throw InputError(std::string(Tag::kName) + " contains non-finite entries");
  }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const FixedVec&, const FixedVec&) = default;

 private:
  std::vector<double> values_;
};

struct AppearanceTag { static constexpr const char* kName = "appearance"; };
struct PoseTag { static constexpr const char* kName = "pose"; };
struct SpaceTimeTag { static constexpr const char* kName = "spacetime"; };

using AppearanceVec = FixedVec<kAppearanceDim, AppearanceTag>;
using PoseVec = FixedVec<kPoseDim, PoseTag>;
using SpaceTimeVec = FixedVec<kSpaceTimeDim, SpaceTimeTag>;

struct HumanToken {
  std::int64_t frame = 0;
  std::size_t slot = 0;
  AppearanceVec appearance;
  PoseVec pose;
  SpaceTimeVec spacetime;
  bool valid = false;
};

std::vector<double> concat_token(std::span<const double> appearance,
                                 std::span<const double> pose,
                                 std::span<const double> spacetime);
std::vector<double> concat_token(const AppearanceVec& a, const PoseVec& p,
                                 const SpaceTimeVec& s);

struct SplitToken {
  AppearanceVec appearance;
  PoseVec pose;
  SpaceTimeVec spacetime;
};

SplitToken split_token(std::span<const double> h);

// Dense T x P grid of tokens, row n = t * P + i. Padding slots are all-zero
// with valid == false and identity kNoIdentity.
class ClipBatch {
 public:
  ClipBatch(std::size_t num_frames, std::size_t max_people,
            AttributeDims dims = AttributeDims{});

  std::size_t num_frames() const noexcept { return num_frames_; }
  std::size_t max_people() const noexcept { return max_people_; }
  std::size_t num_tokens() const noexcept { return num_frames_ * max_people_; }
  const AttributeDims& dims() const noexcept { return dims_; }

  std::size_t index(std::size_t frame, std::size_t slot) const;

  void set_token(std::size_t frame, std::size_t slot, std::span<const double> h,
                 std::int64_t identity = kNoIdentity);
  void set_token(const HumanToken& token, std::int64_t identity = kNoIdentity);

  const Matrix& tokens() const noexcept { return tokens_; }
  std::span<const double> token(std::size_t n) const { return tokens_.row(n); }
  bool valid(std::size_t n) const { return valid_[n] != 0; }
  const std::vector<std::uint8_t>& mask() const noexcept { return valid_; }
  std::int64_t identity(std::size_t n) const { return identities_[n]; }
  bool has_identities() const noexcept;
  std::size_t num_valid() const noexcept;

 private:
  std::size_t num_frames_;
  std::size_t max_people_;
  AttributeDims dims_;
  Matrix tokens_;
  std::vector<std::uint8_t> valid_;
  std::vector<std::int64_t> identities_;
};

}  // namespace t3dp
