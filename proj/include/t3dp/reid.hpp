#pragma once

#include <cstddef>
#include <vector>

#include "t3dp/embedding.hpp"
#include "t3dp/transformer.hpp"

namespace t3dp {

struct LossConfig {
  double margin = 10.0;
  double learning_rate = 0.001;
  std::size_t iterations = 1;

  void validate() const;
};

// Token pairs for the contrastive loss, by flat clip index n = t * P + i.
struct TokenPair {
  std::size_t first = 0;
  std::size_t second = 0;
  friend bool operator==(const TokenPair&, const TokenPair&) = default;
};

struct PairSet {
  std::vector<TokenPair> positives;
  std::vector<TokenPair> negatives;
};

/// Every unordered pair of labeled valid tokens: same identity -> positive,
/// different identity -> negative (within-frame pairs included).
PairSet build_pairs(const ClipBatch& batch);

/// sum_pos |a - b| + sum_neg max(0, m - |a - b|), L2 distance between rows.
double reid_loss(const Matrix& outputs, const PairSet& pairs, const LossConfig& cfg);

/// Adds dL/d(outputs) into `d_outputs`; returns the loss. The gradient of the
/// distance at coincident points is taken as zero, as is the hinge at m.
double reid_loss_backward(const Matrix& outputs, const PairSet& pairs,
                          const LossConfig& cfg, Matrix& d_outputs);

struct LossAndGradients {
  double loss = 0.0;
  TransformerWeights gradients;
};

LossAndGradients loss_gradients(const ClipBatch& batch, const TransformerWeights& w,
                                const AttentionConfig& attention, const LossConfig& cfg);
LossAndGradients loss_gradients(const ClipBatch& batch, const PairSet& pairs,
                                const TransformerWeights& w,
                                const AttentionConfig& attention, const LossConfig& cfg);

struct TrainResult {
  TransformerWeights weights;
  std::vector<double> loss_history;  // loss before each descent step
};

/// Plain gradient descent, one step per clip per iteration, clips in order.
/// Throws DivergenceError carrying the step index on a non-finite loss.
TrainResult train(const std::vector<ClipBatch>& clips, TransformerWeights weights,
                  const AttentionConfig& attention, const LossConfig& cfg);

}  // namespace t3dp
