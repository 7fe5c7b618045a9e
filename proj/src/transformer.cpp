#include "t3dp/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "t3dp/error.hpp"
#include "t3dp/kernels.hpp"
#include "t3dp/rng.hpp"

namespace t3dp {

namespace {

std::span<const double> segment(std::span<const double> row, const AttributeDims& dims,
                                Attribute a) {
  return row.subspan(dims.offset(a), dims.size(a));
}

std::span<double> segment(std::span<double> row, const AttributeDims& dims, Attribute a) {
  return row.subspan(dims.offset(a), dims.size(a));
}

void check_tokens(const Matrix& tokens, std::span<const std::uint8_t> mask,
                  const AttributeDims& dims) {
  if (tokens.cols() != dims.total())
    throw DimensionError("token width " + std::to_string(tokens.cols()) +
                         " does not match attribute dims total " +
                         std::to_string(dims.total()));
  if (mask.size() != tokens.rows())
    throw DimensionError("mask length does not match token count");
}

void check_block(const BlockWeights& w, const AttributeDims& dims) {
  for (Attribute a : kAttributes) {
    const std::size_t d = dims.size(a);
    const AttributeWeights& aw = w[a];
    for (const Matrix* m : {&aw.wq, &aw.wk, &aw.wv, &aw.ff1, &aw.ff2})
      if (m->rows() != d || m->cols() != d)
        throw DimensionError("block weights for " + to_string(a) + " are not " +
                             std::to_string(d) + "x" + std::to_string(d));
    for (const auto* v : {&aw.b1, &aw.b2, &aw.gain, &aw.bias})
      if (v->size() != d)
        throw DimensionError("block vector for " + to_string(a) + " has wrong length");
  }
}

// Rows of `tokens` restricted to attribute `a`, multiplied by `w`; padding rows
// stay zero.
Matrix project(const Matrix& tokens, std::span<const std::uint8_t> mask,
               const AttributeDims& dims, Attribute a, const Matrix& w) {
  const std::size_t d = dims.size(a);
  Matrix out(tokens.rows(), d);
  for (std::size_t n = 0; n < tokens.rows(); ++n) {
    if (!mask[n]) continue;
    kernels::gemv(w.flat(), d, d, segment(tokens.row(n), dims, a), out.row(n));
  }
  return out;
}

struct AttentionParts {
  std::array<Matrix, 3> q, k, probs;
  Matrix v;
  Matrix attention;
  Matrix output;
};

AttentionParts attention_sublayer(const Matrix& x, std::span<const std::uint8_t> mask,
                                  const AttributeDims& dims, const BlockWeights& w,
                                  const AttentionConfig& cfg) {
  const std::size_t n_tok = x.rows();
  AttentionParts parts;
  parts.v = Matrix(n_tok, dims.total());
  for (Attribute a : kAttributes) {
    const auto ai = static_cast<std::size_t>(a);
    const Matrix va = project(x, mask, dims, a, w[a].wv);
    for (std::size_t n = 0; n < n_tok; ++n) {
      auto dst = segment(parts.v.row(n), dims, a);
      std::copy(va.row(n).begin(), va.row(n).end(), dst.begin());
    }
    if (cfg.beta(a) == 0.0) {
      parts.probs[ai] = Matrix(n_tok, n_tok);
      continue;
    }
    parts.q[ai] = project(x, mask, dims, a, w[a].wq);
    parts.k[ai] = project(x, mask, dims, a, w[a].wk);
    parts.probs[ai] = attribute_attention(parts.q[ai], parts.k[ai], dims.size(a), mask);
  }
  parts.attention = total_attention(parts.probs, cfg);

  parts.output = Matrix(n_tok, dims.total());
  for (std::size_t r = 0; r < n_tok; ++r) {
    if (!mask[r]) continue;
    auto out = parts.output.row(r);
    std::copy(x.row(r).begin(), x.row(r).end(), out.begin());
    for (std::size_t c = 0; c < n_tok; ++c) {
      const double a = parts.attention(r, c);
      if (a != 0.0) kernels::axpy(a, parts.v.row(c), out);
    }
  }
  return parts;
}

struct FeedForwardParts {
  Matrix pre_activation;
  Matrix normalized;
  Matrix inv_std;
  Matrix output;
};

FeedForwardParts feed_forward_sublayer(const Matrix& x, std::span<const std::uint8_t> mask,
                                       const AttributeDims& dims, const BlockWeights& w) {
  const std::size_t n_tok = x.rows();
  FeedForwardParts parts{Matrix(n_tok, dims.total()), Matrix(n_tok, dims.total()),
                         Matrix(n_tok, 3), Matrix(n_tok, dims.total())};
  std::vector<double> hidden, y;
  for (std::size_t n = 0; n < n_tok; ++n) {
    if (!mask[n]) continue;
    for (Attribute a : kAttributes) {
      const std::size_t d = dims.size(a);
      const AttributeWeights& aw = w[a];
      const auto xs = segment(x.row(n), dims, a);
      auto u = segment(parts.pre_activation.row(n), dims, a);
      kernels::gemv(aw.ff1.flat(), d, d, xs, u);
      hidden.assign(d, 0.0);
      for (std::size_t j = 0; j < d; ++j) {
        u[j] += aw.b1[j];
        hidden[j] = u[j] > 0.0 ? u[j] : 0.0;
      }
      y.assign(d, 0.0);
      kernels::gemv(aw.ff2.flat(), d, d, hidden, y);
      double mean = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        y[j] += xs[j] + aw.b2[j];
        mean += y[j];
      }
      mean /= static_cast<double>(d);
      double var = 0.0;
      for (std::size_t j = 0; j < d; ++j) var += (y[j] - mean) * (y[j] - mean);
      var /= static_cast<double>(d);
      const double inv_std = 1.0 / std::sqrt(var + kNormEpsilon);
      parts.inv_std(n, static_cast<std::size_t>(a)) = inv_std;
      auto nrm = segment(parts.normalized.row(n), dims, a);
      auto out = segment(parts.output.row(n), dims, a);
      for (std::size_t j = 0; j < d; ++j) {
        nrm[j] = (y[j] - mean) * inv_std;
        out[j] = aw.gain[j] * nrm[j] + aw.bias[j];
      }
    }
  }
  return parts;
}

void fill_uniform(std::span<double> v, double bound, Rng& rng) {
  for (double& x : v) x = rng.uniform(-bound, bound);
}

}  // namespace

double AttentionConfig::beta(Attribute a) const noexcept {
  switch (a) {
    case Attribute::app: return beta_app;
    case Attribute::pose: return beta_pose;
    case Attribute::loc: return beta_loc;
  }
  return 0.0;
}

void AttentionConfig::validate() const {
  for (double b : {beta_app, beta_pose, beta_loc})
    if (!std::isfinite(b) || b < 0.0)
      throw ConfigError("beta weights must be finite and non-negative");
  if (sum() <= 0.0) throw ConfigError("at least one beta weight must be positive");
}

AttributeWeights::AttributeWeights(std::size_t dim)
    : wq(dim, dim),
      wk(dim, dim),
      wv(dim, dim),
      ff1(dim, dim),
      ff2(dim, dim),
      b1(dim, 0.0),
      b2(dim, 0.0),
      gain(dim, 1.0),
      bias(dim, 0.0) {}

BlockWeights::BlockWeights(const AttributeDims& dims)
    : per_attribute{AttributeWeights(dims.app), AttributeWeights(dims.pose),
                    AttributeWeights(dims.loc)} {}

TransformerWeights TransformerWeights::zeros(const AttributeDims& dims) {
  return TransformerWeights{dims, std::vector<BlockWeights>(kNumBlocks, BlockWeights(dims))};
}

TransformerWeights TransformerWeights::init_uniform(const AttributeDims& dims,
                                                    std::uint64_t seed) {
  TransformerWeights w = zeros(dims);
  Rng rng(seed);
  for (auto& block : w.blocks) {
    for (Attribute a : kAttributes) {
      AttributeWeights& aw = block[a];
      const double bound = 1.0 / std::sqrt(static_cast<double>(dims.size(a)));
      for (Matrix* m : {&aw.wq, &aw.wk, &aw.wv, &aw.ff1, &aw.ff2})
        fill_uniform(m->flat(), bound, rng);
    }
  }
  return w;
}

std::size_t TransformerWeights::num_parameters() const {
  std::size_t n = 0;
  for_each_tensor(*this, [&](const std::string&, std::span<const double> t) { n += t.size(); });
  return n;
}

void for_each_tensor(TransformerWeights& w, const TensorVisitor& fn) {
  for (std::size_t b = 0; b < w.blocks.size(); ++b) {
    for (Attribute a : kAttributes) {
      AttributeWeights& aw = w.blocks[b][a];
      const std::string p = "block" + std::to_string(b) + "." + to_string(a) + ".";
      fn(p + "wq", aw.wq.flat());
      fn(p + "wk", aw.wk.flat());
      fn(p + "wv", aw.wv.flat());
      fn(p + "ff1", aw.ff1.flat());
      fn(p + "b1", aw.b1);
      fn(p + "ff2", aw.ff2.flat());
      fn(p + "b2", aw.b2);
      fn(p + "gain", aw.gain);
      fn(p + "bias", aw.bias);
    }
  }
}

void for_each_tensor(const TransformerWeights& w, const ConstTensorVisitor& fn) {
  for_each_tensor(const_cast<TransformerWeights&>(w),
                  [&](const std::string& name, std::span<double> t) {
                    fn(name, std::span<const double>(t));
                  });
}

Matrix attribute_attention(const Matrix& q, const Matrix& k, std::size_t dim,
                           std::span<const std::uint8_t> mask) {
  const std::size_t n_tok = q.rows();
  if (k.rows() != n_tok || mask.size() != n_tok || q.cols() != dim || k.cols() != dim)
    throw DimensionError("attribute_attention operand shapes disagree");
  if (dim == 0) throw DimensionError("attribute_attention needs dim > 0");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }))
    throw EmptyClipError("attention over a clip with no valid tokens");

  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  Matrix probs(n_tok, n_tok);
  std::vector<double> logits(n_tok);
  for (std::size_t r = 0; r < n_tok; ++r) {
    if (!mask[r]) continue;
    double max_logit = kNegInf;
    for (std::size_t c = 0; c < n_tok; ++c) {
      logits[c] = mask[c] ? kernels::dot(q.row(r), k.row(c)) * scale : kNegInf;
      if (std::isnan(logits[c])) throw InputError("attention logit is NaN");
      max_logit = std::max(max_logit, logits[c]);
    }
    // An overflowed dot product saturates: the mass goes to the +inf keys.
    const bool saturated = std::isinf(max_logit);
    double total = 0.0;
    for (std::size_t c = 0; c < n_tok; ++c) {
      if (!mask[c]) continue;
      probs(r, c) = saturated ? (logits[c] == max_logit ? 1.0 : 0.0)
                              : std::exp(logits[c] - max_logit);
      total += probs(r, c);
    }
    for (std::size_t c = 0; c < n_tok; ++c) probs(r, c) /= total;
  }
  return probs;
}

Matrix total_attention(const std::array<Matrix, 3>& per_attribute,
                       const AttentionConfig& cfg) {
  const std::size_t rows = per_attribute[0].rows();
  const std::size_t cols = per_attribute[0].cols();
  for (const Matrix& m : per_attribute)
    if (m.rows() != rows || m.cols() != cols)
      throw DimensionError("total_attention: per-attribute matrices differ in shape");
  Matrix total(rows, cols);
  for (Attribute a : kAttributes) {
    const double beta = cfg.beta(a);
    if (beta == 0.0) continue;
    kernels::axpy(beta, per_attribute[static_cast<std::size_t>(a)].flat(), total.flat());
  }
  return total;
}

Matrix self_attention_layer(const Matrix& tokens, std::span<const std::uint8_t> mask,
                            const AttributeDims& dims, const BlockWeights& w,
                            const AttentionConfig& cfg) {
  check_tokens(tokens, mask, dims);
  check_block(w, dims);
  cfg.validate();
  return attention_sublayer(tokens, mask, dims, w, cfg).output;
}

Matrix feed_forward_layer(const Matrix& tokens, std::span<const std::uint8_t> mask,
                          const AttributeDims& dims, const BlockWeights& w) {
  check_tokens(tokens, mask, dims);
  check_block(w, dims);
  return feed_forward_sublayer(tokens, mask, dims, w).output;
}

ForwardTrace forward_traced(const ClipBatch& batch, const TransformerWeights& w,
                            const AttentionConfig& cfg) {
  if (batch.dims() != w.dims)
    throw DimensionError("clip attribute dims do not match transformer weights");
  if (w.blocks.size() != kNumBlocks)
    throw DimensionError("transformer needs exactly 3 blocks");
  cfg.validate();
  for (const auto& block : w.blocks) check_block(block, w.dims);
  if (batch.num_valid() == 0) throw EmptyClipError("clip has no valid tokens");

  ForwardTrace trace;
  trace.mask = batch.mask();
  Matrix x = batch.tokens();
  for (const auto& block : w.blocks) {
    BlockTrace bt;
    bt.input = x;
    AttentionParts att = attention_sublayer(x, trace.mask, w.dims, block, cfg);
    FeedForwardParts ff = feed_forward_sublayer(att.output, trace.mask, w.dims, block);
    bt.q = std::move(att.q);
    bt.k = std::move(att.k);
    bt.probs = std::move(att.probs);
    bt.v = std::move(att.v);
    bt.attention = std::move(att.attention);
    bt.after_attention = std::move(att.output);
    bt.pre_activation = std::move(ff.pre_activation);
    bt.normalized = std::move(ff.normalized);
    bt.inv_std = std::move(ff.inv_std);
    x = std::move(ff.output);
    trace.blocks.push_back(std::move(bt));
  }
  trace.output = std::move(x);
  return trace;
}

Matrix forward(const ClipBatch& batch, const TransformerWeights& w,
               const AttentionConfig& cfg) {
  return forward_traced(batch, w, cfg).output;
}

void backward(const ForwardTrace& trace, const Matrix& d_output,
              const TransformerWeights& w, const AttentionConfig& cfg,
              TransformerWeights& grads) {
  const AttributeDims& dims = w.dims;
  if (grads.dims != dims || grads.blocks.size() != w.blocks.size())
    throw DimensionError("gradient buffer does not match weights");
  if (d_output.rows() != trace.output.rows() || d_output.cols() != dims.total())
    throw DimensionError("output gradient has wrong shape");

  const auto& mask = trace.mask;
  const std::size_t n_tok = d_output.rows();
  Matrix d_x = d_output;

  for (std::size_t b = w.blocks.size(); b-- > 0;) {
    const BlockTrace& bt = trace.blocks[b];
    const BlockWeights& bw = w.blocks[b];
    BlockWeights& gw = grads.blocks[b];

    // Feed-forward sublayer and its normalization.
    Matrix d_sa(n_tok, dims.total());
    std::vector<double> dn, dy, hidden, d_hidden;
    for (std::size_t n = 0; n < n_tok; ++n) {
      if (!mask[n]) continue;
      for (Attribute a : kAttributes) {
        const std::size_t d = dims.size(a);
        const auto ai = static_cast<std::size_t>(a);
        const AttributeWeights& aw = bw[a];
        AttributeWeights& ga = gw[a];
        const auto dz = segment(std::span<const double>(d_x.row(n)), dims, a);
        const auto nrm = segment(bt.normalized.row(n), dims, a);
        const auto u = segment(bt.pre_activation.row(n), dims, a);
        const auto xs = segment(bt.after_attention.row(n), dims, a);

        dn.assign(d, 0.0);
        double mean_dn = 0.0, mean_dn_n = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          dn[j] = dz[j] * aw.gain[j];
          ga.gain[j] += dz[j] * nrm[j];
          ga.bias[j] += dz[j];
          mean_dn += dn[j];
          mean_dn_n += dn[j] * nrm[j];
        }
        mean_dn /= static_cast<double>(d);
        mean_dn_n /= static_cast<double>(d);
        const double inv_std = bt.inv_std(n, ai);
        dy.assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j)
          dy[j] = inv_std * (dn[j] - mean_dn - nrm[j] * mean_dn_n);

        hidden.assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) hidden[j] = u[j] > 0.0 ? u[j] : 0.0;
        for (std::size_t j = 0; j < d; ++j) ga.b2[j] += dy[j];
        kernels::outer_acc(dy, hidden, ga.ff2.flat());
        d_hidden.assign(d, 0.0);
        kernels::gemv_t_acc(aw.ff2.flat(), d, d, dy, d_hidden);
        for (std::size_t j = 0; j < d; ++j) {
          if (!(u[j] > 0.0)) d_hidden[j] = 0.0;
          ga.b1[j] += d_hidden[j];
        }
        kernels::outer_acc(d_hidden, xs, ga.ff1.flat());

        auto dst = segment(d_sa.row(n), dims, a);
        std::copy(dy.begin(), dy.end(), dst.begin());
        kernels::gemv_t_acc(aw.ff1.flat(), d, d, d_hidden, dst);
      }
    }

    // Attention sublayer: h_sa = x + A V.
    Matrix d_in = d_sa;
    Matrix d_attention(n_tok, n_tok);
    Matrix d_v(n_tok, dims.total());
    for (std::size_t r = 0; r < n_tok; ++r) {
      if (!mask[r]) continue;
      for (std::size_t c = 0; c < n_tok; ++c) {
        if (!mask[c]) continue;
        d_attention(r, c) = kernels::dot(d_sa.row(r), bt.v.row(c));
        const double a = bt.attention(r, c);
        if (a != 0.0) kernels::axpy(a, d_sa.row(r), d_v.row(c));
      }
    }

    std::vector<double> d_logits(n_tok);
    for (Attribute a : kAttributes) {
      const std::size_t d = dims.size(a);
      const auto ai = static_cast<std::size_t>(a);
      const AttributeWeights& aw = bw[a];
      AttributeWeights& ga = gw[a];

      for (std::size_t n = 0; n < n_tok; ++n) {
        if (!mask[n]) continue;
        const auto dv = segment(std::span<const double>(d_v.row(n)), dims, a);
        const auto xs = segment(bt.input.row(n), dims, a);
        kernels::outer_acc(dv, xs, ga.wv.flat());
        kernels::gemv_t_acc(aw.wv.flat(), d, d, dv, segment(d_in.row(n), dims, a));
      }

      const double beta = cfg.beta(a);
      if (beta == 0.0) continue;
      const double scale = 1.0 / std::sqrt(static_cast<double>(d));
      const Matrix& probs = bt.probs[ai];
      const Matrix& q = bt.q[ai];
      const Matrix& k = bt.k[ai];
      Matrix d_q(n_tok, d), d_k(n_tok, d);
      for (std::size_t r = 0; r < n_tok; ++r) {
        if (!mask[r]) continue;
        double inner = 0.0;
        for (std::size_t c = 0; c < n_tok; ++c) inner += probs(r, c) * beta * d_attention(r, c);
        for (std::size_t c = 0; c < n_tok; ++c) {
          d_logits[c] = mask[c] ? probs(r, c) * (beta * d_attention(r, c) - inner) * scale : 0.0;
        }
        for (std::size_t c = 0; c < n_tok; ++c) {
          if (d_logits[c] == 0.0) continue;
          kernels::axpy(d_logits[c], k.row(c), d_q.row(r));
          kernels::axpy(d_logits[c], q.row(r), d_k.row(c));
        }
      }
      for (std::size_t n = 0; n < n_tok; ++n) {
        if (!mask[n]) continue;
        const auto xs = segment(bt.input.row(n), dims, a);
        auto dst = segment(d_in.row(n), dims, a);
        kernels::outer_acc(d_q.row(n), xs, ga.wq.flat());
        kernels::outer_acc(d_k.row(n), xs, ga.wk.flat());
        kernels::gemv_t_acc(aw.wq.flat(), d, d, d_q.row(n), dst);
        kernels::gemv_t_acc(aw.wk.flat(), d, d, d_k.row(n), dst);
      }
    }
    d_x = std::move(d_in);
  }
}

}  // namespace t3dp
