#pragma once

// Deterministic two-region test images with graded noise, ground-truth
// trimaps and scripted sparse strokes. `rwseg corpus` writes these to disk;
// the copy under data/corpus is what the acceptance suite reads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rwseg/feedback.hpp"
#include "rwseg/image.hpp"
#include "rwseg/seeds.hpp"
#include "rwseg/strokes.hpp"

namespace rwseg::synthetic {

struct Case {
  std::string name;
  ImageGrid image;
  std::vector<Stroke> strokes;
  SeedState seeds;
  Trimap trimap;
  /// 1 where the object is.
  std::vector<std::uint8_t> truth;
};

struct ShapeSpec {
  std::string name;
  /// Inside test in pixel coordinates.
  std::function<bool(double, double)> inside;
  double noise_sigma;
  /// Fraction of the object/background contrast lost from left to right,
  /// which leaves part of the contour weak.
  double fade;
  std::vector<Stroke> strokes;
};

namespace detail {

// Box-Muller on a portable engine so the corpus is identical everywhere.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    constexpr double scale = 1.0 / 18446744073709551616.0;
    const double u1 = (static_cast<double>(rng_()) + 1.0) * scale;
    const double u2 = static_cast<double>(rng_()) * scale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

inline Stroke line(StrokeKind kind, double x0, double y0, double x1, double y1, double radius = 1.0) {
  return Stroke{kind, radius, {{x0, y0}, {x1, y1}}};
}

}  // namespace detail

inline constexpr std::size_t kSize = 64;
inline constexpr double kForeground = 0.68;
inline constexpr double kBackground = 0.32;
/// Trimap band half-width in pixels around the true contour.
inline constexpr int kBand = 2;

inline Case render(const ShapeSpec& spec, std::uint64_t seed) {
  const std::size_t w = kSize;
  const std::size_t h = kSize;
  Case c;
  c.name = spec.name;
  c.truth.resize(w * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      c.truth[y * w + x] = spec.inside(static_cast<double>(x), static_cast<double>(y)) ? 1 : 0;

  detail::Gaussian noise(seed);
  std::vector<double> g(w * h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = static_cast<double>(i % w) / static_cast<double>(w - 1);
    const double contrast = (kForeground - kBackground) * (1.0 - spec.fade * x);
    double v = kBackground + (c.truth[i] ? contrast : 0.0) + spec.noise_sigma * noise();
    v = std::clamp(v, 0.0, 1.0);
    g[i] = std::floor(v * 255.0 + 0.5) / 255.0;  // 8-bit, as stored on disk
  }
  c.image = ImageGrid(w, h, std::move(g));

  c.trimap = Trimap{w, h, std::vector<TrimapCode>(w * h)};
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const auto label = c.truth[y * w + x];
      bool mixed = false;
      for (int dy = -kBand; dy <= kBand && !mixed; ++dy)
        for (int dx = -kBand; dx <= kBand && !mixed; ++dx) {
          const auto xx = static_cast<std::ptrdiff_t>(x) + dx;
          const auto yy = static_cast<std::ptrdiff_t>(y) + dy;
          if (xx < 0 || yy < 0 || xx >= static_cast<std::ptrdiff_t>(w) || yy >= static_cast<std::ptrdiff_t>(h))
            continue;
          mixed = c.truth[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)] != label;
        }
      c.trimap.codes[y * w + x] =
          mixed ? TrimapCode::unclassified : (label ? TrimapCode::foreground : TrimapCode::background);
    }

  c.strokes = spec.strokes;
  c.seeds = replay_strokes(c.strokes, w, h);
  return c;
}

inline std::vector<ShapeSpec> shapes() {
  using detail::line;
  constexpr auto F = StrokeKind::foreground;
  constexpr auto B = StrokeKind::background;
  // Background strokes run along three image sides; the open side and the
  // faded (low-contrast) right half of each object leave an uncertain band.
  auto frame = [](double m) {
    return Stroke{B, 1.0, {{m, 63.0 - m}, {m, m}, {63.0 - m, m}, {63.0 - m, 63.0 - m}}};
  };
  std::vector<ShapeSpec> out;
  out.push_back({"disk",
                 [](double x, double y) { return std::hypot(x - 32.0, y - 32.0) <= 17.0; },
                 0.015, 1.0,
                 {line(F, 28, 32, 36, 32), frame(4)}});
  out.push_back({"ellipse",
                 [](double x, double y) {
                   const double c = std::cos(0.5), s = std::sin(0.5);
                   const double u = (x - 31.0) * c + (y - 33.0) * s;
                   const double v = -(x - 31.0) * s + (y - 33.0) * c;
                   return (u * u) / (22.0 * 22.0) + (v * v) / (12.0 * 12.0) <= 1.0;
                 },
                 0.02, 1.0,
                 {line(F, 20, 27, 42, 39), frame(4)}});
  out.push_back({"rounded_box",
                 [](double x, double y) {
                   const double dx = std::max(std::abs(x - 32.0) - 14.0, 0.0);
                   const double dy = std::max(std::abs(y - 30.0) - 10.0, 0.0);
                   return std::hypot(dx, dy) <= 5.0;
                 },
                 0.03, 0.8,
                 {line(F, 20, 30, 44, 30), frame(4)}});
  out.push_back({"star",
                 [](double x, double y) {
                   const double r = std::hypot(x - 32.0, y - 32.0);
                   const double t = std::atan2(y - 32.0, x - 32.0);
                   return r <= 17.0 + 5.0 * std::sin(5.0 * t);
                 },
                 0.04, 0.6,
                 {line(F, 24, 32, 40, 32), frame(4)}});
  out.push_back({"peanut",
                 [](double x, double y) {
                   return std::hypot(x - 22.0, y - 32.0) <= 12.0 || std::hypot(x - 42.0, y - 32.0) <= 12.0;
                 },
                 0.05, 0.6,
                 {line(F, 16, 32, 48, 32), frame(4)}});
  out.push_back({"blob",
                 [](double x, double y) {
                   const double r = std::hypot(x - 30.0, y - 34.0);
                   const double t = std::atan2(y - 34.0, x - 30.0);
                   return r <= 18.0 + 3.0 * std::sin(3.0 * t) + 2.0 * std::cos(2.0 * t);
                 },
                 0.06, 0.5,
                 {line(F, 22, 34, 38, 34), frame(4)}});
  return out;
}

/// The bundled corpus: six shapes, noise sigma graded 0.015 .. 0.06.
inline std::vector<Case> corpus() {
  std::vector<Case> out;
  std::uint64_t seed = 1;
  for (const auto& s : shapes()) out.push_back(render(s, seed++));
  return out;
}

}  // namespace rwseg::synthetic
