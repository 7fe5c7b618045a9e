#include "t3dp/reid.hpp"

#include <cmath>

#include "t3dp/error.hpp"
#include "t3dp/kernels.hpp"

namespace t3dp {

void LossConfig::validate() const {
  if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be > 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning rate must be finite and >= 0");
}

PairSet build_pairs(const ClipBatch& batch) {
  if (!batch.has_identities())
    throw TrainingDataError("clip carries no identity labels");
  std::vector<std::size_t> labeled;
  for (std::size_t n = 0; n < batch.num_tokens(); ++n)
    if (batch.valid(n) && batch.identity(n) != kNoIdentity) labeled.push_back(n);

  PairSet pairs;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    for (std::size_t j = i + 1; j < labeled.size(); ++j) {
      const TokenPair p{labeled[i], labeled[j]};
      if (batch.identity(p.first) == batch.identity(p.second))
        pairs.positives.push_back(p);
      else
        pairs.negatives.push_back(p);
    }
  }
  return pairs;
}

namespace {

double pair_distance(const Matrix& outputs, const TokenPair& p) {
  return std::sqrt(kernels::squared_distance(outputs.row(p.first), outputs.row(p.second)));
}

// Adds coeff * (a - b) / |a - b| to row a and its negation to row b.
void push_apart(const Matrix& outputs, const TokenPair& p, double dist, double coeff,
                Matrix& grad) {
  if (dist == 0.0) return;
  const double s = coeff / dist;
  kernels::axpy(s, outputs.row(p.first), grad.row(p.first));
  kernels::axpy(-s, outputs.row(p.second), grad.row(p.first));
  kernels::axpy(-s, outputs.row(p.first), grad.row(p.second));
  kernels::axpy(s, outputs.row(p.second), grad.row(p.second));
}

}  // namespace

double reid_loss(const Matrix& outputs, const PairSet& pairs, const LossConfig& cfg) {
  double loss = 0.0;
  for (const auto& p : pairs.positives) loss += pair_distance(outputs, p);
  for (const auto& p : pairs.negatives) loss += std::max(0.0, cfg.margin - pair_distance(outputs, p));
  return loss;
}

double reid_loss_backward(const Matrix& outputs, const PairSet& pairs,
                          const LossConfig& cfg, Matrix& d_outputs) {
  double loss = 0.0;
  for (const auto& p : pairs.positives) {
    const double dist = pair_distance(outputs, p);
    loss += dist;
    push_apart(outputs, p, dist, 1.0, d_outputs);
  }
  for (const auto& p : pairs.negatives) {
    const double dist = pair_distance(outputs, p);
    const double hinge = cfg.margin - dist;
    if (hinge > 0.0) {
      loss += hinge;
      push_apart(outputs, p, dist, -1.0, d_outputs);
    }
  }
  return loss;
}

LossAndGradients loss_gradients(const ClipBatch& batch, const PairSet& pairs,
                                const TransformerWeights& w,
                                const AttentionConfig& attention, const LossConfig& cfg) {
  cfg.validate();
  const ForwardTrace trace = forward_traced(batch, w, attention);
  Matrix d_out(trace.output.rows(), trace.output.cols());
  LossAndGradients result{0.0, TransformerWeights::zeros(w.dims)};
  for (auto& block : result.gradients.blocks)
    for (Attribute a : kAttributes) block[a].gain.assign(w.dims.size(a), 0.0);
  result.loss = reid_loss_backward(trace.output, pairs, cfg, d_out);
  backward(trace, d_out, w, attention, result.gradients);
  return result;
}

LossAndGradients loss_gradients(const ClipBatch& batch, const TransformerWeights& w,
                                const AttentionConfig& attention, const LossConfig& cfg) {
  return loss_gradients(batch, build_pairs(batch), w, attention, cfg);
}

TrainResult train(const std::vector<ClipBatch>& clips, TransformerWeights weights,
                  const AttentionConfig& attention, const LossConfig& cfg) {
  cfg.validate();
  if (clips.empty()) throw TrainingDataError("train needs at least one clip");
  std::vector<PairSet> pairs;
  pairs.reserve(clips.size());
  for (const auto& clip : clips) pairs.push_back(build_pairs(clip));

  TrainResult result{std::move(weights), {}};
  std::size_t step = 0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t c = 0; c < clips.size(); ++c, ++step) {
      LossAndGradients lg;
      try {
        lg = loss_gradients(clips[c], pairs[c], result.weights, attention, cfg);
      } catch (const InputError& e) {
        // Only reachable once the weights themselves have blown up.
        throw DivergenceError("step " + std::to_string(step) + ": " + e.what(), step);
      }
      if (!std::isfinite(lg.loss))
        throw DivergenceError("non-finite loss at step " + std::to_string(step), step);
      result.loss_history.push_back(lg.loss);
      if (cfg.learning_rate == 0.0) continue;
      std::vector<std::span<const double>> grads;
      for_each_tensor(lg.gradients,
                      [&](const std::string&, std::span<const double> g) { grads.push_back(g); });
      std::size_t k = 0;
      for_each_tensor(result.weights, [&](const std::string&, std::span<double> t) {
        kernels::axpy(-cfg.learning_rate, grads[k++], t);
      });
    }
  }
  return result;
}

}  // namespace t3dp
