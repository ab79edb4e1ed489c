#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pgen/io/checkpoint.hpp"
#include "pgen/io/csv.hpp"
#include "pgen/network/network.hpp"
#include "pgen/training/dataset.hpp"

namespace pgen {

struct TrainConfig {
  int qp = 37;
  std::size_t batch_size = 32;
  double lr_initial = 1e-4;
  int lr_decay_epoch = 20;
  double lr_decay_factor = 0.1;
  int epochs = 40;
  std::uint64_t seed = 0;
  std::optional<std::string> init_checkpoint;
  ArchConfig arch;
};

inline void validate(const TrainConfig& c) {
  validate(c.arch);
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(c.lr_initial > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(c.lr_decay_factor > 0.0 && c.lr_decay_factor <= 1.0)) throw ConfigError("lr_decay_factor must lie in (0, 1]");
  if (c.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (c.lr_decay_epoch < 0) throw ConfigError("lr_decay_epoch must be non-negative");
}

// Step schedule over 1-based epochs: lr_initial through lr_decay_epoch,
// lr_initial · lr_decay_factor afterwards.
inline double learning_rate(const TrainConfig& c, int epoch) {
  return epoch > c.lr_decay_epoch ? c.lr_initial * c.lr_decay_factor : c.lr_initial;
}

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::vector<double> batch_losses;
};

struct TrainResult {
  Model<float> model;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

struct Batch {
  Tensor<float> frame;
  Tensor<float> mask;
  Tensor<float> target;
};

inline Batch assemble_batch(const Dataset& ds, const std::vector<std::size_t>& order, std::size_t begin,
                            std::size_t end, bool with_mask) {
  const std::size_t n = end - begin;
  const std::size_t s = ds.patch_size;
  Batch b{Tensor<float>(n, 1, s, s), with_mask ? Tensor<float>(n, 1, s, s) : Tensor<float>(),
          Tensor<float>(n, 1, s, s)};
  for (std::size_t i = 0; i < n; ++i) {
    const PatchPair& p = ds.patches[order[begin + i]];
    float* f = b.frame.plane(i, 0);
    float* t = b.target.plane(i, 0);
    for (std::size_t j = 0; j < s * s; ++j) {
      f[j] = static_cast<float>(p.distorted[j]) / 255.0f;
      t[j] = static_cast<float>(p.target[j]) / 255.0f;
    }
    if (with_mask) std::copy(p.mask.begin(), p.mask.end(), b.mask.plane(i, 0));
  }
  return b;
}

inline void check_compatible(const ArchConfig& arch, const Dataset& ds) {
  if (ds.patches.empty()) throw DataError("dataset is empty");
  if (arch.uses_mask()) {
    if (!ds.has_masks) throw ConfigError(std::string("variant ") + to_string(arch.variant) + " needs a dataset with masks");
    if (ds.mask_kind != arch.mask_kind)
      throw ConfigError(std::string("dataset masks are ") + to_string(ds.mask_kind) + " but the model expects " +
                        to_string(arch.mask_kind));
  }
}

// Mean infer-mode MSE (on the [0, 1] scale) over a dataset.
inline double dataset_loss(const Model<float>& model, const Dataset& ds, std::size_t batch_size = 32) {
  check_compatible(model.arch, ds);
  std::vector<std::size_t> order(ds.patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  double sum = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const std::size_t end = std::min(order.size(), begin + batch_size);
    const Batch b = assemble_batch(ds, order, begin, end, model.arch.uses_mask());
    const Tensor<float> out = infer(model, b.frame, model.arch.uses_mask() ? &b.mask : nullptr);
    sum += static_cast<double>(mse_loss(out, b.target).loss) * static_cast<double>(end - begin);
  }
  return sum / static_cast<double>(order.size());
}

// Minimizes MSE with Adam over seeded per-epoch shuffles. Starts from init
// when given, else from config.init_checkpoint, else from a fresh model.
inline TrainResult train(const TrainConfig& config, const Dataset& ds, const Model<float>* init = nullptr,
                         const EpochCallback& on_epoch = {}) {
  validate(config);
  check_compatible(config.arch, ds);
  TrainResult result;
  if (init) {
    io::require_arch(init->arch, config.arch, "initial model");
    result.model = *init;
  } else if (config.init_checkpoint) {
    result.model = io::load_checkpoint(*config.init_checkpoint, config.arch);
  } else {
    result.model = build_model<float>(config.arch, config.seed);
  }
  Model<float>& model = result.model;
  const bool with_mask = config.arch.uses_mask();

  OptimizerState<float> opt;
  Rng shuffle_rng(config.seed ^ 0xD1B54A32D192ED03ull);
  const auto start = std::chrono::steady_clock::now();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    opt.learning_rate = learning_rate(config, epoch);
    const std::vector<std::size_t> order = shuffle_rng.permutation(ds.patches.size());
    double loss_sum = 0.0;
    int batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const Batch b = assemble_batch(ds, order, begin, end, with_mask);
      ForwardCache<float> cache;
      const Tensor<float> out = forward(model, b.frame, with_mask ? &b.mask : nullptr, Mode::Train, &cache);
      LossResult<float> loss = mse_loss(out, b.target);
      if (!std::isfinite(loss.loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index),
                            epoch, batch_index);
      const ModelGrads<float> grads = backward(model, cache, loss.grad);
      try {
        adam_step(trainable_slots(model, grads), opt);
      } catch (const NumericError& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch_index),
                            epoch, batch_index);
      }
      result.log.batch_losses.push_back(loss.loss);
      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(end - begin);
    }
    EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), opt.learning_rate,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

// Continues training from a saved model whose architecture must equal
// config.arch.
inline TrainResult finetune(const std::string& base_checkpoint, const TrainConfig& config, const Dataset& ds,
                            const EpochCallback& on_epoch = {}) {
  const Model<float> base = io::load_checkpoint(base_checkpoint, config.arch);
  return train(config, ds, &base, on_epoch);
}

// Append-only CSV: epoch,mean_loss,lr,wall_seconds.
inline void append_training_log(const std::string& path, const EpochRecord& rec) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot write '" + path + "'");
  if (fresh) out << "epoch,mean_loss,lr,wall_seconds\n";
  out << rec.epoch << ',' << io::fixed(rec.mean_loss, 9) << ',' << rec.lr << ',' << io::fixed(rec.wall_seconds, 3) << '\n';
}

}  // namespace pgen
