#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fsts/errors.hpp"
#include "fsts/kernels.hpp"
#include "fsts/rng.hpp"
#include "fsts/tensor.hpp"

namespace fsts {

// One convolutional block: filter count, filter length, pool size.
struct ConvBlockSpec {
  int64_t filters = 0;
  int64_t filter_length = 0;
  int64_t pool_size = 0;
};

inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEpsilon = 1e-5;

struct EmbeddingConfig {
  std::vector<ConvBlockSpec> blocks = {{128, 7, 3}, {64, 5, 3}, {64, 5, 2}};
  double dropout_rate = 0.2;
  int64_t input_length = 187;

  // Time extent after each block (input extent first).
  std::vector<int64_t> time_extents() const {
    validate();
    std::vector<int64_t> t{input_length};
    for (const ConvBlockSpec& b : blocks) t.push_back(t.back() / b.pool_size);
    return t;
  }

  int64_t embedding_dim() const {
    const auto t = time_extents();
    return blocks.back().filters * t.back();
  }

  void validate() const {
    if (input_length < 1) throw ConfigError("embedding config: input length must be positive");
    if (blocks.empty()) throw ConfigError("embedding config: need at least one block");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
      throw ConfigError("embedding config: dropout rate must lie in [0,1)");
    }
    int64_t t = input_length;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const ConvBlockSpec& b = blocks[i];
      if (b.filters < 1 || b.filter_length < 1 || b.pool_size < 1) {
        throw ConfigError("embedding config: block " + std::to_string(i) +
                          " has non-positive extents");
      }
      if (b.filter_length > t) {
        throw ConfigError("embedding config: block " + std::to_string(i) + " filter length " +
                          std::to_string(b.filter_length) + " exceeds time extent " +
                          std::to_string(t));
      }
      if (b.pool_size > t) {
        throw ConfigError("embedding config: block " + std::to_string(i) + " pool size " +
                          std::to_string(b.pool_size) + " exceeds time extent " +
                          std::to_string(t));
      }
      t /= b.pool_size;
    }
  }
};

template <class T>
struct ConvBlockParamsT {
  TensorT<T> filters;       // [k, in_channels, out_channels]
  TensorT<T> bias;          // [out_channels]
  TensorT<T> gamma;         // [out_channels]
  TensorT<T> beta;          // [out_channels]
  TensorT<T> running_mean;  // [out_channels]
  TensorT<T> running_var;   // [out_channels]
};

// All learnable tensors of the embedding and relational modules.
template <class T>
struct ModelParamsT {
  std::vector<ConvBlockParamsT<T>> blocks;
  TensorT<T> head_weights;  // [embedding_dim, 1]
  TensorT<T> head_bias;     // [1]

  // He-style uniform fan-in init; batch norm starts as the identity.
  static ModelParamsT init(const EmbeddingConfig& config, uint64_t seed) {
    config.validate();
    ModelParamsT p;
    Rng rng(hash_seed(seed, "init"));
    int64_t cin = 1;
    for (const ConvBlockSpec& spec : config.blocks) {
      ConvBlockParamsT<T> blk;
      blk.filters = TensorT<T>({spec.filter_length, cin, spec.filters});
      const double bound = std::sqrt(6.0 / static_cast<double>(spec.filter_length * cin));
      for (auto& v : blk.filters.values) v = static_cast<T>(rng.uniform(-bound, bound));
      blk.bias = TensorT<T>({spec.filters}, T(0));
      blk.gamma = TensorT<T>({spec.filters}, T(1));
      blk.beta = TensorT<T>({spec.filters}, T(0));
      blk.running_mean = TensorT<T>({spec.filters}, T(0));
      blk.running_var = TensorT<T>({spec.filters}, T(1));
      p.blocks.push_back(std::move(blk));
      cin = spec.filters;
    }
    const int64_t dim = config.embedding_dim();
    p.head_weights = TensorT<T>({dim, 1});
    const double bound = std::sqrt(6.0 / static_cast<double>(dim));
    for (auto& v : p.head_weights.values) v = static_cast<T>(rng.uniform(-bound, bound));
    p.head_bias = TensorT<T>({1}, T(0));
    return p;
  }

  std::vector<NamedTensorT<T>> trainable() {
    std::vector<NamedTensorT<T>> out;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string prefix = "block" + std::to_string(i) + ".";
      out.push_back({prefix + "filters", &blocks[i].filters});
      out.push_back({prefix + "bias", &blocks[i].bias});
      out.push_back({prefix + "bn_gamma", &blocks[i].gamma});
      out.push_back({prefix + "bn_beta", &blocks[i].beta});
    }
    out.push_back({"head.weights", &head_weights});
    out.push_back({"head.bias", &head_bias});
    return out;
  }

  // Everything a checkpoint must carry, running stats included.
  std::vector<NamedTensorT<T>> all_tensors() {
    std::vector<NamedTensorT<T>> out;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string prefix = "block" + std::to_string(i) + ".";
      out.push_back({prefix + "filters", &blocks[i].filters});
      out.push_back({prefix + "bias", &blocks[i].bias});
      out.push_back({prefix + "bn_gamma", &blocks[i].gamma});
      out.push_back({prefix + "bn_beta", &blocks[i].beta});
      out.push_back({prefix + "bn_running_mean", &blocks[i].running_mean});
      out.push_back({prefix + "bn_running_var", &blocks[i].running_var});
    }
    out.push_back({"head.weights", &head_weights});
    out.push_back({"head.bias", &head_bias});
    return out;
  }

  void ensure_grads() {
    for (auto& nt : trainable()) nt.tensor->ensure_grad();
  }
  void zero_grads() {
    for (auto& nt : trainable()) nt.tensor->zero_grad();
  }
};

using ModelParams = ModelParamsT<float>;

namespace detail {

template <class T>
TensorT<T> as_btc(const TensorT<T>& series) {
  if (series.rank() == 1) return TensorT<T>({1, series.shape[0], 1}, series.values);
  if (series.rank() == 2) {
    return TensorT<T>({series.shape[0], series.shape[1], 1}, series.values);
  }
  throw ShapeError("embed: expected [length] or [batch, length] input");
}

template <class T>
void check_input_length(const EmbeddingConfig& config, const TensorT<T>& x) {
  const int64_t len = x.rank() == 1 ? x.shape[0] : x.shape[1];
  if (len != config.input_length) {
    throw ShapeError("embed: series length " + std::to_string(len) +
                     " != configured input length " + std::to_string(config.input_length));
  }
}

template <class T>
void accumulate(TensorT<T>& param, const TensorT<T>& contribution) {
  param.ensure_grad();
  for (int64_t i = 0; i < contribution.size(); ++i) param.grad[i] += contribution.values[i];
}

}  // namespace detail

// Per-block caches needed to run the embedding backward pass.
template <class T>
struct EmbedTrace {
  struct Block {
    TensorT<T> conv_input;
    TensorT<T> conv_out;  // pre-activation
    nn::BatchNormCache<T> bn;
    uint64_t dropout_salt = 0;
    nn::MaxPoolCache pool;
  };
  std::vector<Block> blocks;
  int64_t batch = 0;
};

// Inference embedding: pure over const params, dropout inactive, batch norm
// reads running stats. Input [batch, length] or [length]; output [batch, dim].
template <class T>
TensorT<T> embed_infer(const ModelParamsT<T>& params, const EmbeddingConfig& config,
                       const TensorT<T>& series) {
  detail::check_input_length(config, series);
  TensorT<T> x = detail::as_btc(series);
  const int64_t batch = x.shape[0];
  for (size_t i = 0; i < params.blocks.size(); ++i) {
    const auto& blk = params.blocks[i];
    x = nn::conv1d_forward(x, blk.filters, blk.bias);
    x = nn::relu_forward(x);
    x = nn::batchnorm1d_infer(x, blk.gamma, blk.beta, blk.running_mean, blk.running_var,
                              T(kBatchNormEpsilon));
    x = nn::maxpool1d_forward(x, config.blocks[i].pool_size);
  }
  return TensorT<T>({batch, x.shape[1] * x.shape[2]}, std::move(x.values));
}

// Training embedding: batch statistics, running-stat updates, dropout masks
// derived from the salt. Fills the trace for the backward pass.
template <class T>
TensorT<T> embed_train(ModelParamsT<T>& params, const EmbeddingConfig& config,
                       const TensorT<T>& series, uint64_t dropout_salt, EmbedTrace<T>& trace) {
  detail::check_input_length(config, series);
  TensorT<T> x = detail::as_btc(series);
  const int64_t batch = x.shape[0];
  trace.blocks.clear();
  trace.blocks.resize(params.blocks.size());
  trace.batch = batch;
  for (size_t i = 0; i < params.blocks.size(); ++i) {
    auto& blk = params.blocks[i];
    auto& tb = trace.blocks[i];
    tb.conv_input = std::move(x);
    tb.conv_out = nn::conv1d_forward(tb.conv_input, blk.filters, blk.bias);
    TensorT<T> h = nn::relu_forward(tb.conv_out);
    h = nn::batchnorm1d_forward(h, blk.gamma, blk.beta, blk.running_mean, blk.running_var,
                                Mode::train, T(kBatchNormMomentum), T(kBatchNormEpsilon),
                                &tb.bn);
    tb.dropout_salt = hash_seed(dropout_salt, "block", static_cast<uint64_t>(i));
    h = nn::dropout_forward(h, config.dropout_rate, Mode::train, tb.dropout_salt);
    x = nn::maxpool1d_forward(h, config.blocks[i].pool_size, &tb.pool);
  }
  return TensorT<T>({batch, x.shape[1] * x.shape[2]}, std::move(x.values));
}

// Backward through the embedding; accumulates parameter gradients and
// returns nothing (the input gradient is not needed, series are data).
template <class T>
void embed_backward(ModelParamsT<T>& params, const EmbeddingConfig& config,
                    const EmbedTrace<T>& trace, const TensorT<T>& grad_embedding) {
  const size_t n_blocks = params.blocks.size();
  if (trace.blocks.size() != n_blocks) throw ShapeError("embed_backward: trace mismatch");
  // Un-flatten to the last block's pooled shape.
  const auto& last_pool = trace.blocks.back().pool;
  const int64_t t_out = last_pool.input_shape[1] / config.blocks.back().pool_size;
  TensorT<T> g({trace.batch, t_out, config.blocks.back().filters}, grad_embedding.values);
  for (size_t ri = n_blocks; ri-- > 0;) {
    auto& blk = params.blocks[ri];
    const auto& tb = trace.blocks[ri];
    g = nn::maxpool1d_backward(g, tb.pool);
    g = nn::dropout_backward(g, config.dropout_rate, Mode::train, tb.dropout_salt);
    auto bn_grads = nn::batchnorm1d_backward(g, tb.bn, blk.gamma);
    detail::accumulate(blk.gamma, bn_grads.gamma);
    detail::accumulate(blk.beta, bn_grads.beta);
    g = nn::relu_backward(bn_grads.input, tb.conv_out);
    auto conv_grads = nn::conv1d_backward(g, tb.conv_input, blk.filters, ri > 0);
    detail::accumulate(blk.filters, conv_grads.filters);
    detail::accumulate(blk.bias, conv_grads.bias);
    if (ri > 0) g = std::move(conv_grads.input);
  }
}

// Relational similarity score: sigmoid(dense(|a - b|)), in (0,1) and exactly
// symmetric in its arguments. Accepts [dim] vectors or [batch, dim] stacks.
// The sigmoid saturates to exactly 0 or 1 in finite precision for |z| large;
// scores are nudged back inside the open interval to keep the contract.
template <class T>
TensorT<T> similarity_batch(const ModelParamsT<T>& params, const TensorT<T>& emb_a,
                            const TensorT<T>& emb_b) {
  const TensorT<T> diff = nn::abs_diff_forward(emb_a, emb_b);
  const TensorT<T> z = nn::dense_forward(diff, params.head_weights, params.head_bias);
  TensorT<T> scores = nn::sigmoid_forward(z);
  const T lo = std::nextafter(T(0), T(1));
  const T hi = std::nextafter(T(1), T(0));
  for (auto& s : scores.values) s = std::min(hi, std::max(lo, s));
  return scores;
}

template <class T>
T similarity(const ModelParamsT<T>& params, const TensorT<T>& emb_a, const TensorT<T>& emb_b) {
  if (emb_a.rank() != 1 || emb_b.rank() != 1) {
    throw ShapeError("similarity: expected rank-1 embeddings");
  }
  if (emb_a.size() != params.head_weights.shape[0] ||
      emb_b.size() != params.head_weights.shape[0]) {
    throw ShapeError("similarity: embedding dim " + std::to_string(emb_a.size()) + "/" +
                     std::to_string(emb_b.size()) + " != head dim " +
                     std::to_string(params.head_weights.shape[0]));
  }
  return similarity_batch(params, emb_a, emb_b).values[0];
}

// Forward + backward for one batch of pairs under binary cross-entropy.
// Accumulates into parameter grads; returns the batch loss and scores.
template <class T>
struct PairStepResult {
  T loss;
  TensorT<T> scores;  // [batch, 1]
};

template <class T>
PairStepResult<T> train_pair_batch(ModelParamsT<T>& params, const EmbeddingConfig& config,
                                   const TensorT<T>& side_a, const TensorT<T>& side_b,
                                   const TensorT<T>& labels, uint64_t dropout_salt) {
  params.ensure_grads();
  EmbedTrace<T> trace_a, trace_b;
  const TensorT<T> emb_a =
      embed_train(params, config, side_a, hash_seed(dropout_salt, "arm", 0), trace_a);
  const TensorT<T> emb_b =
      embed_train(params, config, side_b, hash_seed(dropout_salt, "arm", 1), trace_b);

  const TensorT<T> diff = nn::abs_diff_forward(emb_a, emb_b);
  const TensorT<T> z = nn::dense_forward(diff, params.head_weights, params.head_bias);
  TensorT<T> scores = nn::sigmoid_forward(z);
  TensorT<T> flat_scores(std::vector<int64_t>{scores.shape[0]}, scores.values);
  const T loss = nn::bce_loss(flat_scores, labels);

  TensorT<T> grad_scores = nn::bce_backward(flat_scores, labels);
  grad_scores.shape = scores.shape;  // [batch, 1]
  const TensorT<T> grad_z = nn::sigmoid_backward(grad_scores, scores);
  auto head_grads = nn::dense_backward(grad_z, diff, params.head_weights);
  detail::accumulate(params.head_weights, head_grads.weights);
  detail::accumulate(params.head_bias, head_grads.bias);
  auto [grad_a, grad_b] = nn::abs_diff_backward(head_grads.input, emb_a, emb_b);
  embed_backward(params, config, trace_a, grad_a);
  embed_backward(params, config, trace_b, grad_b);
  return {loss, std::move(scores)};
}

// Inference-mode scores for a batch of pairs (no grads, no stat updates).
template <class T>
TensorT<T> score_pairs_infer(const ModelParamsT<T>& params, const EmbeddingConfig& config,
                             const TensorT<T>& side_a, const TensorT<T>& side_b) {
  const TensorT<T> emb_a = embed_infer(params, config, side_a);
  const TensorT<T> emb_b = embed_infer(params, config, side_b);
  TensorT<T> scores = similarity_batch(params, emb_a, emb_b);
  return TensorT<T>(std::vector<int64_t>{scores.shape[0]}, std::move(scores.values));
}

}  // namespace fsts
