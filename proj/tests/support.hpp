#pragma once

// Test-only oracles and generators. Nothing here calls into the code paths it
// is used to check beyond the public forward pass and loss.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "t3dp/metrics.hpp"
#include "t3dp/reid.hpp"
#include "t3dp/rng.hpp"
#include "t3dp/transformer.hpp"

namespace t3dp::testing {

inline const AttributeDims kSmallDims{8, 16, 4};

// Random clip: every slot valid with probability `fill`, identities drawn from
// [0, num_ids), at most one token per identity per frame.
inline ClipBatch random_clip(Rng& rng, std::size_t frames, std::size_t people,
                             const AttributeDims& dims, std::size_t num_ids,
                             double fill = 0.85) {
  ClipBatch b(frames, people, dims);
  std::vector<double> h(dims.total());
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<std::int64_t> ids(num_ids);
    std::iota(ids.begin(), ids.end(), 0);
    for (std::size_t k = ids.size(); k > 1; --k) std::swap(ids[k - 1], ids[rng.below(k)]);
    for (std::size_t i = 0; i < people && i < num_ids; ++i) {
      if (rng.uniform() > fill) continue;
      for (double& x : h) x = rng.normal();
      b.set_token(t, i, h, ids[i]);
    }
  }
  if (b.num_valid() == 0) {
    for (double& x : h) x = rng.normal();
    b.set_token(0, 0, h, 0);
  }
  return b;
}

// Randomize every tensor, including gains and biases, so no gradient is
// trivially zero.
inline TransformerWeights random_weights(Rng& rng, const AttributeDims& dims) {
  TransformerWeights w = TransformerWeights::zeros(dims);
  for_each_tensor(w, [&](const std::string& name, std::span<double> t) {
    const bool is_gain = name.ends_with("gain");
    for (double& x : t) x = is_gain ? rng.uniform(0.5, 1.5) : rng.uniform(-0.5, 0.5);
  });
  return w;
}

inline double loss_of(const ClipBatch& batch, const PairSet& pairs, const TransformerWeights& w,
                      const AttentionConfig& att, const LossConfig& lc) {
  return reid_loss(forward(batch, w, att), pairs, lc);
}

// Central finite differences of the loss with respect to every parameter.
inline TransformerWeights numeric_gradient(const ClipBatch& batch, const PairSet& pairs,
                                           TransformerWeights w, const AttentionConfig& att,
                                           const LossConfig& lc, double step = 1e-5) {
  TransformerWeights g = TransformerWeights::zeros(w.dims);
  std::vector<std::span<double>> gt;
  for_each_tensor(g, [&](const std::string&, std::span<double> t) { gt.push_back(t); });
  std::size_t k = 0;
  for_each_tensor(w, [&](const std::string&, std::span<double> t) {
    std::span<double> out = gt[k++];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + step;
      const double up = loss_of(batch, pairs, w, att, lc);
      t[i] = saved - step;
      const double down = loss_of(batch, pairs, w, att, lc);
      t[i] = saved;
      out[i] = (up - down) / (2.0 * step);
    }
  });
  return g;
}

// Smallest distance of any ReLU pre-activation or active-set boundary (hinge
// argument, coincident positive pair) from its kink.
inline double kink_distance(const ClipBatch& batch, const PairSet& pairs,
                            const TransformerWeights& w, const AttentionConfig& att,
                            const LossConfig& lc, double* hinge_out = nullptr) {
  const ForwardTrace tr = forward_traced(batch, w, att);
  double relu = std::numeric_limits<double>::infinity();
  for (const auto& bt : tr.blocks)
    for (std::size_t n = 0; n < batch.num_tokens(); ++n)
      if (batch.valid(n))
        for (double u : bt.pre_activation.row(n)) relu = std::min(relu, std::abs(u));
  double hinge = std::numeric_limits<double>::infinity();
  auto dist = [&](const TokenPair& p) {
    double s = 0.0;
    for (std::size_t j = 0; j < tr.output.cols(); ++j) {
      const double d = tr.output(p.first, j) - tr.output(p.second, j);
      s += d * d;
    }
    return std::sqrt(s);
  };
  for (const auto& p : pairs.negatives) hinge = std::min(hinge, std::abs(lc.margin - dist(p)));
  for (const auto& p : pairs.positives) hinge = std::min(hinge, dist(p));
  if (hinge_out) *hinge_out = hinge;
  return relu;
}

struct TensorError {
  std::string name;
  double relative = 0.0;
};

// Per-tensor relative error ||a - n|| / max(||a||, ||n||); tensors whose
// gradients are both below `floor` in norm count as matching.
inline std::vector<TensorError> gradient_errors(const TransformerWeights& analytic,
                                                const TransformerWeights& numeric,
                                                double floor = 1e-8) {
  std::vector<std::pair<std::string, std::span<const double>>> a;
  for_each_tensor(analytic, [&](const std::string& n, std::span<const double> t) {
    a.emplace_back(n, t);
  });
  std::vector<TensorError> out;
  std::size_t k = 0;
  for_each_tensor(numeric, [&](const std::string& name, std::span<const double> t) {
    const auto& at = a[k++].second;
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      diff += (at[i] - t[i]) * (at[i] - t[i]);
      na += at[i] * at[i];
      nn += t[i] * t[i];
    }
    const double scale = std::sqrt(std::max(na, nn));
    out.push_back({name, scale < floor ? 0.0 : std::sqrt(diff) / scale});
  });
  return out;
}

// Minimum total cost over all injective row -> column maps (rows <= cols) or
// column -> row maps, by enumerating permutations.
inline double brute_force_assignment(const Matrix& c) {
  const bool wide = c.rows() <= c.cols();
  const std::size_t small = wide ? c.rows() : c.cols();
  const std::size_t large = wide ? c.cols() : c.rows();
  if (small == 0) return 0.0;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // Enumerate every ordering of `large`; the first `small` entries form the map.
  do {
    double total = 0.0;
    for (std::size_t k = 0; k < small; ++k) total += wide ? c(k, perm[k]) : c(perm[k], k);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// IDF1 by trying every injective map from gt ids to pred ids (and leaving ids
// unmatched).
inline double brute_force_idf1(const std::vector<LabeledDetection>& seq) {
  std::vector<std::int64_t> gts, preds;
  std::int64_t num_gt = 0, num_pred = 0;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> overlap;
  for (const auto& d : seq) {
    if (d.gt_id) {
      ++num_gt;
      if (std::find(gts.begin(), gts.end(), *d.gt_id) == gts.end()) gts.push_back(*d.gt_id);
    }
    if (d.pred_id) {
      ++num_pred;
      if (std::find(preds.begin(), preds.end(), *d.pred_id) == preds.end())
        preds.push_back(*d.pred_id);
    }
    if (d.gt_id && d.pred_id) ++overlap[{*d.gt_id, *d.pred_id}];
  }
  std::int64_t best = 0;
  std::vector<char> used(preds.size(), 0);
  auto rec = [&](auto&& self, std::size_t g, std::int64_t acc) -> void {
    if (g == gts.size()) {
      best = std::max(best, acc);
      return;
    }
    self(self, g + 1, acc);  // gt id left unmatched
    for (std::size_t p = 0; p < preds.size(); ++p) {
      if (used[p]) continue;
      used[p] = 1;
      auto it = overlap.find({gts[g], preds[p]});
      self(self, g + 1, acc + (it == overlap.end() ? 0 : it->second));
      used[p] = 0;
    }
  };
  rec(rec, 0, 0);
  return 2.0 * static_cast<double>(best) / static_cast<double>(num_gt + num_pred);
}

}  // namespace t3dp::testing
