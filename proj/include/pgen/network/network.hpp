#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <type_traits>
#include <vector>

#include "pgen/codec/frame.hpp"
#include "pgen/mask.hpp"
#include "pgen/network/model.hpp"
#include "pgen/numerics/adam.hpp"
#include "pgen/numerics/elementwise.hpp"

namespace pgen {

template <typename Real>
struct BlockCache {
  BatchStats<Real> bn1;
  BatchStats<Real> bn2;
  Tensor<Real> act1;  // ReLU(bn1)
  Tensor<Real> out;   // ReLU(bn2 + skip)
};

template <typename Real>
struct StreamCache {
  Tensor<Real> input;
  Tensor<Real> head;   // ReLU(head conv)
  Tensor<Real> fused;  // head + early mask features (EF only)
  std::vector<BlockCache<Real>> blocks;

  const Tensor<Real>& block_input(std::size_t i) const {
    if (i > 0) return blocks[i - 1].out;
    return fused.empty() ? head : fused;
  }
};

// Activations kept by a train-mode forward pass for backward().
template <typename Real>
struct ForwardCache {
  StreamCache<Real> frame;
  std::optional<StreamCache<Real>> mask;
  Tensor<Real> early_input;
  std::vector<Tensor<Real>> early;  // ReLU outputs of the three mask convs
  Tensor<Real> features;            // tail input
  Tensor<Real> enhanced;
  Tensor<Real> mapped;
};

// Gradients indexed like model.convs / model.norms.
template <typename Real>
struct ModelGrads {
  std::vector<ConvGrads<Real>> convs;
  std::vector<BatchNormGrads<Real>> norms;
};

namespace detail {

template <typename Real>
Tensor<Real> conv_relu(const ConvParams<Real>& p, const Tensor<Real>& x) {
  Tensor<Real> y = conv2d_forward(x, p);
  relu_inplace(y);
  return y;
}

template <typename Real>
Tensor<Real> run_block(Model<Real>& m, const ResBlockIds& ids, const Tensor<Real>& x, Mode mode, BlockCache<Real>* cache) {
  BatchStats<Real> s1, s2;
  const bool keep = cache != nullptr;
  Tensor<Real> a1 = batchnorm_forward(conv2d_forward(x, m.convs[ids.conv1].params), m.norms[ids.bn1].params, mode,
                                      keep ? &s1 : nullptr);
  relu_inplace(a1);
  Tensor<Real> out = batchnorm_forward(conv2d_forward(a1, m.convs[ids.conv2].params), m.norms[ids.bn2].params, mode,
                                       keep ? &s2 : nullptr);
  add_inplace(out, x);
  relu_inplace(out);
  if (keep) {
    cache->bn1 = std::move(s1);
    cache->bn2 = std::move(s2);
    cache->act1 = std::move(a1);
    cache->out = out;
  }
  return out;
}

// inject, when given, is added to the head output before the blocks.
template <typename Real>
Tensor<Real> run_stream(Model<Real>& m, const StreamIds& ids, const Tensor<Real>& input, const Tensor<Real>* inject,
                        Mode mode, StreamCache<Real>* cache) {
  Tensor<Real> x = conv_relu(m.convs[ids.head].params, input);
  if (cache) {
    cache->input = input;
    cache->head = x;
  }
  if (inject) {
    add_inplace(x, *inject);
    if (cache) cache->fused = x;
  }
  if (cache) cache->blocks.resize(ids.blocks.size());
  for (std::size_t b = 0; b < ids.blocks.size(); ++b)
    x = run_block(m, ids.blocks[b], x, mode, cache ? &cache->blocks[b] : nullptr);
  return x;
}

template <typename Real>
void store_conv_grads(ModelGrads<Real>& g, std::size_t id, ConvGrads<Real>&& cg) {
  g.convs[id].weights = std::move(cg.weights);
  g.convs[id].bias = std::move(cg.bias);
}

// Returns the gradient w.r.t. the block input.
template <typename Real>
Tensor<Real> block_backward(const Model<Real>& m, const ResBlockIds& ids, const Tensor<Real>& input,
                            const BlockCache<Real>& cache, const Tensor<Real>& grad_out, ModelGrads<Real>& g) {
  const Tensor<Real> grad_sum = relu_backward(cache.out, grad_out);
  BatchNormGrads<Real> n2 = batchnorm_backward(cache.bn2, m.norms[ids.bn2].params, grad_sum);
  ConvGrads<Real> c2 = conv2d_backward(cache.act1, m.convs[ids.conv2].params, n2.input);
  BatchNormGrads<Real> n1 = batchnorm_backward(cache.bn1, m.norms[ids.bn1].params, relu_backward(cache.act1, c2.input));
  ConvGrads<Real> c1 = conv2d_backward(input, m.convs[ids.conv1].params, n1.input);
  Tensor<Real> grad_in = std::move(c1.input);
  add_inplace(grad_in, grad_sum);

  g.norms[ids.bn2].gamma = std::move(n2.gamma);
  g.norms[ids.bn2].beta = std::move(n2.beta);
  g.norms[ids.bn1].gamma = std::move(n1.gamma);
  g.norms[ids.bn1].beta = std::move(n1.beta);
  store_conv_grads(g, ids.conv2, std::move(c2));
  store_conv_grads(g, ids.conv1, std::move(c1));
  return grad_in;
}

// Backward through the residual blocks only; returns the gradient w.r.t.
// the blocks' input (head output, or head + injection for EF).
template <typename Real>
Tensor<Real> stream_blocks_backward(const Model<Real>& m, const StreamIds& ids, const StreamCache<Real>& cache,
                                    Tensor<Real> grad, ModelGrads<Real>& g) {
  for (std::size_t b = ids.blocks.size(); b-- > 0;)
    grad = block_backward(m, ids.blocks[b], cache.block_input(b), cache.blocks[b], grad, g);
  return grad;
}

template <typename Real>
void head_backward(const Model<Real>& m, const StreamIds& ids, const StreamCache<Real>& cache, const Tensor<Real>& grad,
                   ModelGrads<Real>& g) {
  store_conv_grads(g, ids.head,
                   conv2d_backward(cache.input, m.convs[ids.head].params, relu_backward(cache.head, grad), false));
}

template <typename Real>
void check_inputs(const Model<Real>& m, const Tensor<Real>& frame, const Tensor<Real>* mask) {
  if (frame.shape().c != 1) throw ShapeError("forward: frame must have 1 channel, got " + to_string(frame.shape()));
  if (m.arch.uses_mask()) {
    if (!mask) throw UsageError(std::string("forward: variant ") + to_string(m.arch.variant) + " requires a mask plane");
    require_same_shape(mask->shape(), frame.shape(), "forward mask");
  }
}

}  // namespace detail

// frame and mask are N×1×H×W planes in [0, 1]. Train mode returns the raw
// output and updates BN running statistics; infer mode clips to [0, 1].
template <typename Real>
Tensor<Real> forward(Model<Real>& m, const Tensor<Real>& frame, const std::type_identity_t<Tensor<Real>>* mask, Mode mode,
                     ForwardCache<Real>* cache = nullptr) {
  detail::check_inputs(m, frame, mask);
  if (cache && mode != Mode::Train) throw UsageError("forward: caching is only supported in train mode");
  Tensor<Real> features;
  switch (m.arch.variant) {
    case Variant::Single:
      features = detail::run_stream(m, m.frame, frame, static_cast<const Tensor<Real>*>(nullptr), mode,
                                    cache ? &cache->frame : nullptr);
      break;
    case Variant::AF: {
      features = detail::run_stream(m, m.frame, frame, static_cast<const Tensor<Real>*>(nullptr), mode,
                                    cache ? &cache->frame : nullptr);
      if (cache) cache->mask.emplace();
      const Tensor<Real> mask_features = detail::run_stream(m, *m.mask, *mask, static_cast<const Tensor<Real>*>(nullptr),
                                                            mode, cache ? &*cache->mask : nullptr);
      add_inplace(features, mask_features);
      break;
    }
    case Variant::CF:
      features = detail::run_stream(m, m.frame, concat_channels(frame, *mask), static_cast<const Tensor<Real>*>(nullptr),
                                    mode, cache ? &cache->frame : nullptr);
      break;
    case Variant::EF: {
      Tensor<Real> e = *mask;
      if (cache) cache->early_input = *mask;
      for (std::size_t id : m.early) {
        e = detail::conv_relu(m.convs[id].params, e);
        if (cache) cache->early.push_back(e);
      }
      features = detail::run_stream(m, m.frame, frame, &e, mode, cache ? &cache->frame : nullptr);
      break;
    }
  }
  if (cache) cache->features = features;
  Tensor<Real> x = detail::conv_relu(m.convs[m.tail_enhance].params, features);
  if (cache) cache->enhanced = x;
  x = detail::conv_relu(m.convs[m.tail_map].params, x);
  if (cache) cache->mapped = x;
  x = conv2d_forward(x, m.convs[m.tail_recon].params);
  if (m.arch.global_skip) add_inplace(x, frame);
  if (mode == Mode::Infer)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], Real(0), Real(1));
  return x;
}

// Inference on a const model.
template <typename Real>
Tensor<Real> infer(const Model<Real>& m, const Tensor<Real>& frame, const std::type_identity_t<Tensor<Real>>* mask) {
  return forward(const_cast<Model<Real>&>(m), frame, mask, Mode::Infer);
}

// Parameter gradients of sum(grad_output ⊙ forward(...)) from a train-mode
// cache.
template <typename Real>
ModelGrads<Real> backward(const Model<Real>& m, const ForwardCache<Real>& cache, const Tensor<Real>& grad_output) {
  require_same_shape(grad_output.shape(), Shape{cache.frame.input.shape().n, 1, cache.frame.input.shape().h,
                                                cache.frame.input.shape().w},
                     "backward");
  ModelGrads<Real> g;
  g.convs.resize(m.convs.size());
  g.norms.resize(m.norms.size());

  ConvGrads<Real> recon = conv2d_backward(cache.mapped, m.convs[m.tail_recon].params, grad_output);
  Tensor<Real> grad = relu_backward(cache.mapped, recon.input);
  detail::store_conv_grads(g, m.tail_recon, std::move(recon));
  ConvGrads<Real> mapping = conv2d_backward(cache.enhanced, m.convs[m.tail_map].params, grad);
  grad = relu_backward(cache.enhanced, mapping.input);
  detail::store_conv_grads(g, m.tail_map, std::move(mapping));
  ConvGrads<Real> enhance = conv2d_backward(cache.features, m.convs[m.tail_enhance].params, grad);
  const Tensor<Real> grad_features = std::move(enhance.input);
  detail::store_conv_grads(g, m.tail_enhance, std::move(enhance));

  switch (m.arch.variant) {
    case Variant::Single:
    case Variant::CF: {
      const Tensor<Real> gh = detail::stream_blocks_backward(m, m.frame, cache.frame, grad_features, g);
      detail::head_backward(m, m.frame, cache.frame, gh, g);
      break;
    }
    case Variant::AF: {
      const Tensor<Real> gf = detail::stream_blocks_backward(m, m.frame, cache.frame, grad_features, g);
      detail::head_backward(m, m.frame, cache.frame, gf, g);
      const Tensor<Real> gm = detail::stream_blocks_backward(m, *m.mask, *cache.mask, grad_features, g);
      detail::head_backward(m, *m.mask, *cache.mask, gm, g);
      break;
    }
    case Variant::EF: {
      // The injected features receive the same gradient as the head output.
      const Tensor<Real> gz = detail::stream_blocks_backward(m, m.frame, cache.frame, grad_features, g);
      detail::head_backward(m, m.frame, cache.frame, gz, g);
      Tensor<Real> ge = gz;
      for (std::size_t k = m.early.size(); k-- > 0;) {
        const Tensor<Real>& in = k == 0 ? cache.early_input : cache.early[k - 1];
        ConvGrads<Real> cg = conv2d_backward(in, m.convs[m.early[k]].params, relu_backward(cache.early[k], ge), k > 0);
        if (k > 0) ge = std::move(cg.input);
        detail::store_conv_grads(g, m.early[k], std::move(cg));
      }
      break;
    }
  }
  return g;
}

// Optimizer slots in model order: conv weight/bias, then BN gamma/beta.
template <typename Real>
std::vector<AdamSlot<Real>> trainable_slots(Model<Real>& m, const ModelGrads<Real>& g) {
  std::vector<AdamSlot<Real>> slots;
  for (std::size_t i = 0; i < m.convs.size(); ++i) {
    slots.push_back({m.convs[i].name + ".weight", &m.convs[i].params.weights, &g.convs[i].weights});
    slots.push_back({m.convs[i].name + ".bias", &m.convs[i].params.bias, &g.convs[i].bias});
  }
  for (std::size_t i = 0; i < m.norms.size(); ++i) {
    slots.push_back({m.norms[i].name + ".gamma", &m.norms[i].params.gamma, &g.norms[i].gamma});
    slots.push_back({m.norms[i].name + ".beta", &m.norms[i].params.beta, &g.norms[i].beta});
  }
  return slots;
}

template <typename Real>
Tensor<Real> frame_to_tensor(const FrameY& f) {
  Tensor<Real> t(1, 1, f.height, f.width);
  for (std::size_t i = 0; i < f.pixels.size(); ++i) t[i] = static_cast<Real>(f.pixels[i]) / Real(255);
  return t;
}

template <typename Real>
Tensor<Real> mask_to_tensor(const Mask& m) {
  Tensor<Real> t(1, 1, m.height, m.width);
  for (std::size_t i = 0; i < m.values.size(); ++i) t[i] = static_cast<Real>(m.values[i]);
  return t;
}

// Plane of sample n, channel 0, scaled by 255, rounded and clipped.
template <typename Real>
FrameY tensor_to_frame(const Tensor<Real>& t, std::size_t n = 0) {
  FrameY f(t.shape().w, t.shape().h);
  const Real* p = t.plane(n, 0);
  for (std::size_t i = 0; i < f.pixels.size(); ++i)
    f.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::round(static_cast<double>(p[i]) * 255.0), 0.0, 255.0));
  return f;
}

// Fully convolutional inference over the whole frame.
template <typename Real>
FrameY enhance_frame(const Model<Real>& model, const FrameY& decoded, const Mask* mask) {
  if (model.arch.uses_mask()) {
    if (!mask) throw UsageError(std::string("enhance_frame: variant ") + to_string(model.arch.variant) + " requires a mask");
    if (mask->width != decoded.width || mask->height != decoded.height)
      throw ShapeError("enhance_frame: mask " + dims_string(mask->width, mask->height) + " does not match frame " +
                       dims_string(decoded.width, decoded.height));
    if (mask->kind != model.arch.mask_kind)
      throw UsageError(std::string("enhance_frame: model expects a ") + to_string(model.arch.mask_kind) + " mask, got " +
                       to_string(mask->kind));
  }
  const Tensor<Real> x = frame_to_tensor<Real>(decoded);
  if (!model.arch.uses_mask()) return tensor_to_frame(infer(model, x, static_cast<const Tensor<Real>*>(nullptr)));
  const Tensor<Real> m = mask_to_tensor<Real>(*mask);
  return tensor_to_frame(infer(model, x, &m));
}

}  // namespace pgen
