#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pgen/codec/codec.hpp"
#include "pgen/common/parallel.hpp"
#include "pgen/common/rng.hpp"
#include "pgen/io/manifest.hpp"
#include "pgen/training/patches.hpp"

namespace pgen {

struct Dataset {
  std::size_t patch_size = kPatchSize;
  int qp = 0;
  MaskKind mask_kind = MaskKind::Mean;
  bool has_masks = true;
  std::vector<PatchPair> patches;
  std::vector<std::string> failures;  // one line per clip that could not be read

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.patch_size == b.patch_size && a.qp == b.qp && a.mask_kind == b.mask_kind && a.has_masks == b.has_masks &&
           a.patches == b.patches;
  }
};

// Per-clip generator so one clip's selection does not depend on the others.
inline Rng clip_rng(std::uint64_t seed, std::size_t clip) {
  return Rng(seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(clip) + 1)));
}

// Ascending indices of up to `count` distinct frames out of frame_count.
inline std::vector<std::size_t> select_frames(std::size_t frame_count, std::size_t count, Rng& rng) {
  std::vector<std::size_t> order = rng.permutation(frame_count);
  order.resize(std::min(count, frame_count));
  std::sort(order.begin(), order.end());
  return order;
}

// Splits clips into (train, held-out). At least one clip is held out when
// fraction > 0 and there are two or more clips.
inline std::pair<io::DatasetManifest, io::DatasetManifest> split_clips(const io::DatasetManifest& manifest,
                                                                       double fraction, std::uint64_t seed) {
  io::DatasetManifest train = manifest, held = manifest;
  train.entries.clear();
  held.entries.clear();
  const std::size_t n = manifest.entries.size();
  std::size_t n_held = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  if (fraction > 0.0 && n >= 2) n_held = std::max<std::size_t>(n_held, 1);
  n_held = std::min(n_held, n);
  Rng rng(seed ^ 0x5851F42D4C957F2Dull);
  std::vector<std::size_t> order = rng.permutation(n);
  std::vector<bool> is_held(n, false);
  for (std::size_t i = 0; i < n_held; ++i) is_held[order[i]] = true;
  for (std::size_t i = 0; i < n; ++i) (is_held[i] ? held : train).entries.push_back(manifest.entries[i]);
  return {train, held};
}

struct DatasetOptions {
  CodecConfig codec;
  MaskKind mask_kind = MaskKind::Mean;
  bool with_masks = true;
  std::size_t frames_per_clip = 3;
  std::uint64_t seed = 0;
  std::size_t patch_size = kPatchSize;
};

// Encodes a seeded selection of frames from every clip, derives masks and
// cuts patches. Unreadable clips are recorded in failures and skipped.
inline Dataset build_dataset(const io::DatasetManifest& manifest, const DatasetOptions& opt) {
  validate(opt.codec);
  Dataset ds;
  ds.patch_size = opt.patch_size;
  ds.qp = opt.codec.qp;
  ds.mask_kind = opt.mask_kind;
  ds.has_masks = opt.with_masks;

  struct Job {
    std::size_t clip;
    std::size_t frame;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < manifest.entries.size(); ++c) {
    const auto& e = manifest.entries[c];
    try {
      io::check_entry(manifest, e);
    } catch (const Error& err) {
      ds.failures.push_back(e.path + ": " + err.what());
      continue;
    }
    Rng rng = clip_rng(opt.seed, c);
    for (std::size_t f : select_frames(e.frame_count, opt.frames_per_clip, rng)) jobs.push_back({c, f});
  }

  std::vector<std::vector<PatchPair>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_chunks(jobs.size(), thread_count(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& e = manifest.entries[jobs[i].clip];
      try {
        const FrameY original = io::read_yuv_frame(manifest.resolve(e), e.width, e.height, jobs[i].frame, opt.codec.min_cu);
        const PartitionResult coded = partition_frame(original, opt.codec);
        const Mask mask = opt.with_masks ? make_mask(opt.mask_kind, coded.recon, coded.map) : Mask{};
        results[i] = extract_patches(original, coded.recon, opt.with_masks ? &mask : nullptr, opt.patch_size, opt.patch_size);
        for (auto& p : results[i]) {
          p.qp = opt.codec.qp;
          p.clip = static_cast<std::uint32_t>(jobs[i].clip);
          p.frame = static_cast<std::uint32_t>(jobs[i].frame);
        }
      } catch (const Error& err) {
        errors[i] = e.path + " frame " + std::to_string(jobs[i].frame) + ": " + err.what();
      }
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      ds.failures.push_back(errors[i]);
      continue;
    }
    for (auto& p : results[i]) ds.patches.push_back(std::move(p));
  }
  return ds;
}

}  // namespace pgen
