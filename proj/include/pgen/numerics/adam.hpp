#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pgen/numerics/tensor.hpp"

namespace pgen {

template <typename Real>
struct OptimizerState {
  std::vector<Tensor<Real>> first_moment;
  std::vector<Tensor<Real>> second_moment;
  std::uint64_t step = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One trainable tensor and its gradient for a single update.
template <typename Real>
struct AdamSlot {
  std::string name;
  Tensor<Real>* value;
  const Tensor<Real>* grad;
};

// Bias-corrected adaptive-moment update. Accumulators are created on the
// first call and must mirror the slot list afterwards. All gradients are
// checked before anything is written.
template <typename Real>
void adam_step(const std::vector<AdamSlot<Real>>& slots, OptimizerState<Real>& state) {
  for (const auto& s : slots) {
    require_same_shape(s.value->shape(), s.grad->shape(), "adam_step");
    if (!s.grad->all_finite())
      throw NumericError("adam_step: non-finite gradient for parameter '" + s.name + "'");
  }
  if (state.first_moment.empty() && state.second_moment.empty()) {
    for (const auto& s : slots) {
      state.first_moment.emplace_back(s.value->shape());
      state.second_moment.emplace_back(s.value->shape());
    }
  }
  if (state.first_moment.size() != slots.size() || state.second_moment.size() != slots.size())
    throw ShapeError("adam_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                     " tensors, got " + std::to_string(slots.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    require_same_shape(state.first_moment[i].shape(), slots[i].value->shape(), "adam_step state");
    require_same_shape(state.second_moment[i].shape(), slots[i].value->shape(), "adam_step state");
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  const Real b1 = static_cast<Real>(state.beta1);
  const Real b2 = static_cast<Real>(state.beta2);
  const Real step_size = static_cast<Real>(state.learning_rate / correction1);
  const Real inv_sqrt_c2 = static_cast<Real>(1.0 / std::sqrt(correction2));
  const Real eps = static_cast<Real>(state.epsilon);

  for (std::size_t i = 0; i < slots.size(); ++i) {
    Tensor<Real>& p = *slots[i].value;
    const Tensor<Real>& g = *slots[i].grad;
    Tensor<Real>& m = state.first_moment[i];
    Tensor<Real>& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (Real(1) - b1) * g[j];
      v[j] = b2 * v[j] + (Real(1) - b2) * g[j] * g[j];
      p[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
    }
  }
}

}  // namespace pgen
