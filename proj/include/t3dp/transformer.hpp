#pragma once

// Attribute-separated transformer. Every block has a single-head
// self-attention sublayer followed by a feed-forward sublayer; appearance,
// pose and location segments of each token get their own projections, and the
// three attention maps are mixed by the beta cue weights:
//
//   A = sum_att beta_att * softmax_keys(q_att k_att^T / sqrt(dim_att))
//   h_sa = h + A [v_app; v_pose; v_loc]
//   h_ff = norm_att(h_sa + ff2_att relu(ff1_att h_sa + b1) + b2)   per segment
//
// Padding tokens get -inf logits as keys, all-zero rows as queries, and are
// forced to zero on output.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "t3dp/embedding.hpp"
#include "t3dp/tensor.hpp"

namespace t3dp {

inline constexpr std::size_t kNumBlocks = 3;
inline constexpr double kNormEpsilon = 1e-5;

struct AttentionConfig {
  double beta_app = 1.0 / 3.0;
  double beta_pose = 1.0 / 3.0;
  double beta_loc = 1.0 / 3.0;

  double beta(Attribute a) const noexcept;
  double sum() const noexcept { return beta_app + beta_pose + beta_loc; }
  /// Throws ConfigError unless all betas are finite, >= 0, and one is > 0.
  void validate() const;

  friend bool operator==(const AttentionConfig&, const AttentionConfig&) = default;
};

// Parameters owned by one attribute inside one block. All matrices are square
// with the attribute's width.
struct AttributeWeights {
  Matrix wq, wk, wv;
  Matrix ff1, ff2;
  std::vector<double> b1, b2;
  std::vector<double> gain, bias;

  explicit AttributeWeights(std::size_t dim = 0);
  friend bool operator==(const AttributeWeights&, const AttributeWeights&) = default;
};

struct BlockWeights {
  std::array<AttributeWeights, 3> per_attribute;

  explicit BlockWeights(const AttributeDims& dims = AttributeDims{});
  AttributeWeights& operator[](Attribute a) {
    return per_attribute[static_cast<std::size_t>(a)];
  }
  const AttributeWeights& operator[](Attribute a) const {
    return per_attribute[static_cast<std::size_t>(a)];
  }
  friend bool operator==(const BlockWeights&, const BlockWeights&) = default;
};

struct TransformerWeights {
  AttributeDims dims;
  std::vector<BlockWeights> blocks;

  /// All projections and biases zero, gains one.
  static TransformerWeights zeros(const AttributeDims& dims = AttributeDims{});
  /// Square matrices ~ uniform(-1/sqrt(d), 1/sqrt(d)) in tensor order, gains
  /// one, biases zero.
  static TransformerWeights init_uniform(const AttributeDims& dims, std::uint64_t seed);

  std::size_t num_parameters() const;
  friend bool operator==(const TransformerWeights&, const TransformerWeights&) = default;
};

// Visits every tensor in the fixed serialization order:
// block-major, then app/pose/loc, then wq wk wv ff1 b1 ff2 b2 gain bias.
using TensorVisitor = std::function<void(const std::string& name, std::span<double>)>;
using ConstTensorVisitor =
    std::function<void(const std::string& name, std::span<const double>)>;
void for_each_tensor(TransformerWeights& w, const TensorVisitor& fn);
void for_each_tensor(const TransformerWeights& w, const ConstTensorVisitor& fn);

/// Row-stochastic attention over valid keys. q and k are N x dim.
Matrix attribute_attention(const Matrix& q, const Matrix& k, std::size_t dim,
                           std::span<const std::uint8_t> mask);

Matrix total_attention(const std::array<Matrix, 3>& per_attribute,
                       const AttentionConfig& cfg);

Matrix self_attention_layer(const Matrix& tokens, std::span<const std::uint8_t> mask,
                            const AttributeDims& dims, const BlockWeights& w,
                            const AttentionConfig& cfg);

Matrix feed_forward_layer(const Matrix& tokens, std::span<const std::uint8_t> mask,
                          const AttributeDims& dims, const BlockWeights& w);

/// Aggregated tokens, one row per (t, i) slot of the batch.
Matrix forward(const ClipBatch& batch, const TransformerWeights& w,
               const AttentionConfig& cfg);

// Intermediates kept by forward_traced for the reverse pass.
struct BlockTrace {
  Matrix input;
  std::array<Matrix, 3> q, k, probs;
  Matrix v;
  Matrix attention;
  Matrix after_attention;
  Matrix pre_activation;
  Matrix normalized;
  Matrix inv_std;  // N x 3
};

struct ForwardTrace {
  std::vector<std::uint8_t> mask;
  std::vector<BlockTrace> blocks;
  Matrix output;
};

ForwardTrace forward_traced(const ClipBatch& batch, const TransformerWeights& w,
                            const AttentionConfig& cfg);

/// Reverse pass. `d_output` is dLoss/d(output), N x D. Gradients are added into
/// `grads`, which must have the same shapes as `w`.
void backward(const ForwardTrace& trace, const Matrix& d_output,
              const TransformerWeights& w, const AttentionConfig& cfg,
              TransformerWeights& grads);

}  // namespace t3dp
