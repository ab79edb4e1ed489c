#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pgen/codec/frame.hpp"
#include "pgen/common/rng.hpp"
#include "pgen/io/manifest.hpp"
#include "pgen/io/yuv.hpp"

namespace pgen {

// Procedural stand-in for camera content: smooth illumination, fractal
// texture, hard-edged shapes and mild sensor noise, panned across frames.
struct SynthOptions {
  std::size_t width = 256;
  std::size_t height = 256;
  std::size_t frames = 3;
  std::uint64_t seed = 1;
  int pan_x = 3;  // pixels per frame
  int pan_y = 2;
};

namespace detail {

// Bilinearly interpolated lattice noise, `octaves` layers.
class FractalNoise {
 public:
  FractalNoise(Rng& rng, std::size_t w, std::size_t h, double base_cell, int octaves) {
    double cell = base_cell;
    double amp = 1.0;
    for (int o = 0; o < octaves; ++o) {
      Layer layer;
      layer.cell = cell;
      layer.amp = amp;
      layer.gw = static_cast<std::size_t>(std::ceil(static_cast<double>(w) / cell)) + 2;
      layer.gh = static_cast<std::size_t>(std::ceil(static_cast<double>(h) / cell)) + 2;
      layer.grid.resize(layer.gw * layer.gh);
      for (double& v : layer.grid) v = rng.uniform(-1.0, 1.0);
      layers_.push_back(std::move(layer));
      cell = std::max(1.5, cell / 2.0);
      amp *= 0.55;
    }
  }

  double operator()(double x, double y) const {
    double v = 0.0;
    for (const Layer& l : layers_) {
      const double gx = x / l.cell, gy = y / l.cell;
      const std::size_t ix = static_cast<std::size_t>(gx), iy = static_cast<std::size_t>(gy);
      const double fx = smooth(gx - static_cast<double>(ix)), fy = smooth(gy - static_cast<double>(iy));
      const auto g = [&](std::size_t a, std::size_t b) { return l.grid[std::min(b, l.gh - 1) * l.gw + std::min(a, l.gw - 1)]; };
      const double top = g(ix, iy) * (1 - fx) + g(ix + 1, iy) * fx;
      const double bottom = g(ix, iy + 1) * (1 - fx) + g(ix + 1, iy + 1) * fx;
      v += l.amp * (top * (1 - fy) + bottom * fy);
    }
    return v;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

  struct Layer {
    double cell = 1.0;
    double amp = 1.0;
    std::size_t gw = 0, gh = 0;
    std::vector<double> grid;
  };
  std::vector<Layer> layers_;
};

}  // namespace detail

inline std::vector<FrameY> synthesize_clip(const SynthOptions& opt) {
  Rng rng(opt.seed);
  const std::size_t span = opt.frames > 0 ? opt.frames - 1 : 0;
  const std::size_t ww = opt.width + span * static_cast<std::size_t>(std::abs(opt.pan_x)) + 1;
  const std::size_t wh = opt.height + span * static_cast<std::size_t>(std::abs(opt.pan_y)) + 1;
  std::vector<double> world(ww * wh);

  // Illumination: gradient plus a few broad waves.
  const double base = rng.uniform(70.0, 170.0);
  const double gx = rng.uniform(-0.25, 0.25), gy = rng.uniform(-0.25, 0.25);
  struct Wave { double fx, fy, phase, amp; };
  std::vector<Wave> waves;
  for (int i = 0; i < 3; ++i)
    waves.push_back({rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(0.0, 6.283), rng.uniform(5.0, 25.0)});
  detail::FractalNoise texture(rng, ww, wh, rng.uniform(24.0, 64.0), 5);
  const double texture_amp = rng.uniform(10.0, 35.0);
  for (std::size_t y = 0; y < wh; ++y) {
    for (std::size_t x = 0; x < ww; ++x) {
      double v = base + gx * static_cast<double>(x) + gy * static_cast<double>(y);
      for (const Wave& w : waves) v += w.amp * std::sin(w.fx * static_cast<double>(x) + w.fy * static_cast<double>(y) + w.phase);
      v += texture_amp * texture(static_cast<double>(x), static_cast<double>(y));
      world[y * ww + x] = v;
    }
  }

  // Shapes: ellipses and rotated rectangles, some filled with stripes or
  // their own texture.
  const int shapes = static_cast<int>(6 + rng.below(12));
  for (int s = 0; s < shapes; ++s) {
    const double cx = rng.uniform(0.0, static_cast<double>(ww));
    const double cy = rng.uniform(0.0, static_cast<double>(wh));
    const double rx = rng.uniform(8.0, static_cast<double>(std::min(ww, wh)) / 4.0);
    const double ry = rng.uniform(8.0, static_cast<double>(std::min(ww, wh)) / 4.0);
    const double angle = rng.uniform(0.0, 3.14159);
    const bool ellipse = rng.below(2) == 0;
    const double level = rng.uniform(10.0, 245.0);
    const int fill = static_cast<int>(rng.below(3));  // flat, stripes, texture
    const double stripe_freq = rng.uniform(0.15, 0.8);
    const double stripe_amp = rng.uniform(10.0, 40.0);
    detail::FractalNoise inner(rng, ww, wh, rng.uniform(6.0, 16.0), 3);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const std::size_t x0 = static_cast<std::size_t>(std::max(0.0, cx - std::max(rx, ry) - 2));
    const std::size_t x1 = static_cast<std::size_t>(std::min(static_cast<double>(ww), cx + std::max(rx, ry) + 2));
    const std::size_t y0 = static_cast<std::size_t>(std::max(0.0, cy - std::max(rx, ry) - 2));
    const std::size_t y1 = static_cast<std::size_t>(std::min(static_cast<double>(wh), cy + std::max(rx, ry) + 2));
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) {
        const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        const double u = (dx * ca + dy * sa) / rx, v = (-dx * sa + dy * ca) / ry;
        // Signed distance proxy in pixels; positive inside.
        const double d = ellipse ? (1.0 - std::sqrt(u * u + v * v)) * std::min(rx, ry)
                                 : std::min(1.0 - std::abs(u), 1.0 - std::abs(v)) * std::min(rx, ry);
        const double coverage = std::clamp(d + 0.5, 0.0, 1.0);
        if (coverage <= 0.0) continue;
        double value = level;
        if (fill == 1) value += stripe_amp * std::sin(stripe_freq * (dx * ca + dy * sa));
        if (fill == 2) value += 2.0 * stripe_amp * inner(static_cast<double>(x), static_cast<double>(y));
        double& w = world[y * ww + x];
        w = w * (1.0 - coverage) + value * coverage;
      }
    }
  }

  std::vector<FrameY> frames;
  for (std::size_t t = 0; t < opt.frames; ++t) {
    const std::size_t ox = opt.pan_x >= 0 ? t * static_cast<std::size_t>(opt.pan_x) : (span - t) * static_cast<std::size_t>(-opt.pan_x);
    const std::size_t oy = opt.pan_y >= 0 ? t * static_cast<std::size_t>(opt.pan_y) : (span - t) * static_cast<std::size_t>(-opt.pan_y);
    FrameY f(opt.width, opt.height);
    for (std::size_t y = 0; y < opt.height; ++y)
      for (std::size_t x = 0; x < opt.width; ++x) {
        const double v = world[(y + oy) * ww + (x + ox)] + 2.0 * rng.normal();
        f.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
      }
    frames.push_back(std::move(f));
  }
  return frames;
}

// Writes `clips` synthetic YUV clips and a manifest.json into dir.
inline io::DatasetManifest write_synthetic_corpus(const std::string& dir, std::size_t clips, std::size_t width,
                                                  std::size_t height, std::size_t frames, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  io::DatasetManifest m;
  m.base_dir = dir;
  Rng rng(seed);
  for (std::size_t c = 0; c < clips; ++c) {
    SynthOptions opt;
    opt.width = width;
    opt.height = height;
    opt.frames = frames;
    opt.seed = rng.next_u64();
    opt.pan_x = static_cast<int>(rng.below(9)) - 4;
    opt.pan_y = static_cast<int>(rng.below(7)) - 3;
    char name[32];
    std::snprintf(name, sizeof name, "synth%03zu", c);
    const std::string file = std::string(name) + ".yuv";
    io::write_yuv((std::filesystem::path(dir) / file).string(), synthesize_clip(opt));
    m.entries.push_back({file, width, height, frames, name, "S"});
  }
  io::save_manifest((std::filesystem::path(dir) / "manifest.json").string(), m);
  return m;
}

}  // namespace pgen
