#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgen/common/rng.hpp"
#include "pgen/network/arch.hpp"
#include "pgen/numerics/batchnorm.hpp"
#include "pgen/numerics/conv.hpp"

namespace pgen {

template <typename Real>
struct ConvLayer {
  std::string name;
  ConvParams<Real> params;
};

template <typename Real>
struct NormLayer {
  std::string name;
  BatchNormParams<Real> params;
};

struct ResBlockIds {
  std::size_t conv1 = 0;
  std::size_t bn1 = 0;
  std::size_t conv2 = 0;
  std::size_t bn2 = 0;
};

// A head convolution (+ReLU) followed by residual blocks.
struct StreamIds {
  std::size_t head = 0;
  std::vector<ResBlockIds> blocks;
};

template <typename Real>
struct NamedTensor {
  std::string name;
  Tensor<Real>* tensor;
  bool trainable;
};

template <typename Real>
struct ConstNamedTensor {
  std::string name;
  const Tensor<Real>* tensor;
  bool trainable;
};

// Layers are stored in construction order; that order fixes parameter
// names, checkpoint layout and optimizer slot order.
template <typename Real>
struct Model {
  ArchConfig arch;
  std::vector<ConvLayer<Real>> convs;
  std::vector<NormLayer<Real>> norms;

  // For CF this is the single fused stream over the 2-channel input.
  StreamIds frame;
  std::optional<StreamIds> mask;     // AF
  std::vector<std::size_t> early;    // EF: three mask convolutions
  std::size_t tail_enhance = 0;
  std::size_t tail_map = 0;
  std::size_t tail_recon = 0;

  std::vector<NamedTensor<Real>> tensors() {
    std::vector<NamedTensor<Real>> out;
    for (auto& c : convs) {
      out.push_back({c.name + ".weight", &c.params.weights, true});
      out.push_back({c.name + ".bias", &c.params.bias, true});
    }
    for (auto& n : norms) {
      out.push_back({n.name + ".gamma", &n.params.gamma, true});
      out.push_back({n.name + ".beta", &n.params.beta, true});
      out.push_back({n.name + ".running_mean", &n.params.running_mean, false});
      out.push_back({n.name + ".running_var", &n.params.running_var, false});
    }
    return out;
  }

  std::vector<ConstNamedTensor<Real>> tensors() const {
    std::vector<ConstNamedTensor<Real>> out;
    for (auto& t : const_cast<Model*>(this)->tensors()) out.push_back({t.name, t.tensor, t.trainable});
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors())
      if (t.trainable) n += t.tensor->size();
    return n;
  }

  template <typename Other>
  Model<Other> cast() const {
    Model<Other> m;
    m.arch = arch;
    m.frame = frame;
    m.mask = mask;
    m.early = early;
    m.tail_enhance = tail_enhance;
    m.tail_map = tail_map;
    m.tail_recon = tail_recon;
    for (const auto& c : convs) {
      ConvLayer<Other> o{c.name, {}};
      o.params.weights = c.params.weights.template cast<Other>();
      o.params.bias = c.params.bias.template cast<Other>();
      m.convs.push_back(std::move(o));
    }
    for (const auto& n : norms) {
      NormLayer<Other> o{n.name, {}};
      o.params.gamma = n.params.gamma.template cast<Other>();
      o.params.beta = n.params.beta.template cast<Other>();
      o.params.running_mean = n.params.running_mean.template cast<Other>();
      o.params.running_var = n.params.running_var.template cast<Other>();
      o.params.epsilon = static_cast<Other>(n.params.epsilon);
      o.params.momentum = static_cast<Other>(n.params.momentum);
      m.norms.push_back(std::move(o));
    }
    return m;
  }
};

namespace detail {

template <typename Real>
class ModelBuilder {
 public:
  explicit ModelBuilder(Model<Real>& model) : model_(model) {}

  std::size_t conv(const std::string& name, std::size_t in, std::size_t out) {
    model_.convs.push_back({name, ConvParams<Real>(in, out, model_.arch.kernel)});
    return model_.convs.size() - 1;
  }

  std::size_t norm(const std::string& name) {
    model_.norms.push_back({name, BatchNormParams<Real>(model_.arch.channels)});
    return model_.norms.size() - 1;
  }

  StreamIds stream(const std::string& prefix, std::size_t in_channels) {
    const std::size_t c = model_.arch.channels;
    StreamIds s;
    s.head = conv(prefix + ".head", in_channels, c);
    for (std::size_t b = 0; b < model_.arch.num_res_blocks; ++b) {
      const std::string p = prefix + ".res" + std::to_string(b);
      ResBlockIds ids;
      ids.conv1 = conv(p + ".conv1", c, c);
      ids.bn1 = norm(p + ".bn1");
      ids.conv2 = conv(p + ".conv2", c, c);
      ids.bn2 = norm(p + ".bn2");
      s.blocks.push_back(ids);
    }
    return s;
  }

 private:
  Model<Real>& model_;
};

}  // namespace detail

// Layer graph for arch with seeded fan-in-scaled uniform weights, zero
// biases, gamma = 1 and beta = 0. Weights are drawn in double so float and
// double models built from one seed agree up to rounding.
template <typename Real>
Model<Real> build_model(const ArchConfig& arch, std::uint64_t seed) {
  validate(arch);
  Model<Real> m;
  m.arch = arch;
  detail::ModelBuilder<Real> b(m);
  const std::size_t c = arch.channels;
  switch (arch.variant) {
    case Variant::Single:
      m.frame = b.stream("frame", 1);
      break;
    case Variant::AF:
      m.frame = b.stream("frame", 1);
      m.mask = b.stream("mask", 1);
      break;
    case Variant::CF:
      m.frame = b.stream("fused", 2);
      break;
    case Variant::EF:
      m.frame = b.stream("frame", 1);
      m.early.push_back(b.conv("early.conv0", 1, c));
      m.early.push_back(b.conv("early.conv1", c, c));
      m.early.push_back(b.conv("early.conv2", c, c));
      break;
  }
  m.tail_enhance = b.conv("tail.enhance", c, c);
  m.tail_map = b.conv("tail.map", c, c);
  m.tail_recon = b.conv("tail.recon", c, 1);

  Rng rng(seed);
  for (std::size_t i = 0; i < m.convs.size(); ++i) {
    Tensor<Real>& w = m.convs[i].params.weights;
    // With the global skip the reconstruction layer starts at zero, so an
    // untrained model passes its input through unchanged.
    if (i == m.tail_recon && arch.global_skip) continue;
    const double fan_in = static_cast<double>(w.shape().c * w.shape().h * w.shape().w);
    // ReLU layers get the He gain of 2; the linear reconstruction layer gets 1.
    const double gain = i == m.tail_recon ? 1.0 : 2.0;
    const double bound = std::sqrt(3.0 * gain / fan_in);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = static_cast<Real>(rng.uniform(-bound, bound));
  }
  return m;
}

// Zeroes the reconstruction layer so that, with the global skip, the model
// returns its input frame unchanged.
template <typename Real>
void make_identity(Model<Real>& model) {
  if (!model.arch.global_skip) throw ConfigError("identity model requires global_skip");
  model.convs[model.tail_recon].params.weights.fill(Real(0));
  model.convs[model.tail_recon].params.bias.fill(Real(0));
}

}  // namespace pgen
