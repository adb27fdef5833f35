#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rwseg/error.hpp"
#include "rwseg/seeds.hpp"

namespace rwseg {

struct StrokePoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const StrokePoint&, const StrokePoint&) = default;
};

enum class StrokeKind : std::uint8_t { foreground, background, erase };

/// A brush polyline in pixel coordinates (pixel centers at integers).
struct Stroke {
  StrokeKind kind = StrokeKind::foreground;
  double radius = 1.0;
  std::vector<StrokePoint> points;
  friend bool operator==(const Stroke&, const Stroke&) = default;
};

inline void validate_stroke(const Stroke& s, std::size_t width, std::size_t height) {
  if (s.points.empty()) throw Error(ErrorCode::invalid_input, "stroke has no points");
  if (!(s.radius >= 0.0) || !std::isfinite(s.radius) || s.radius > 1024.0)
    throw Error(ErrorCode::invalid_input, "brush radius must lie in [0, 1024]");
  for (const auto& p : s.points)
    if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= static_cast<double>(width - 1) &&
          p.y <= static_cast<double>(height - 1)))
      throw Error(ErrorCode::invalid_input, "stroke point outside the image");
}

/// Stamps a round brush along the polyline into a seed-code mask
/// (0 none, 1 background, 2 foreground). Samples are at most half a pixel
/// apart; every stamp covers at least the pixel nearest its center.
inline void rasterize_stroke(const Stroke& s, std::vector<std::uint8_t>& mask, std::size_t width,
                             std::size_t height) {
  validate_stroke(s, width, height);
  const std::uint8_t code = s.kind == StrokeKind::foreground ? 2 : s.kind == StrokeKind::background ? 1 : 0;
  const double r = s.radius;
  auto stamp = [&](double cx, double cy) {
    const auto x0 = static_cast<std::ptrdiff_t>(std::max(0.0, std::floor(cx - r)));
    const auto x1 = static_cast<std::ptrdiff_t>(std::min(static_cast<double>(width - 1), std::ceil(cx + r)));
    const auto y0 = static_cast<std::ptrdiff_t>(std::max(0.0, std::floor(cy - r)));
    const auto y1 = static_cast<std::ptrdiff_t>(std::min(static_cast<double>(height - 1), std::ceil(cy + r)));
    for (auto y = y0; y <= y1; ++y)
      for (auto x = x0; x <= x1; ++x) {
        const double dx = static_cast<double>(x) - cx;
        const double dy = static_cast<double>(y) - cy;
        if (dx * dx + dy * dy <= r * r) mask[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] = code;
      }
    const auto nx = static_cast<std::size_t>(std::lround(cx));
    const auto ny = static_cast<std::size_t>(std::lround(cy));
    mask[ny * width + nx] = code;
  };
  stamp(s.points.front().x, s.points.front().y);
  for (std::size_t k = 1; k < s.points.size(); ++k) {
    const auto& a = s.points[k - 1];
    const auto& b = s.points[k];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / 0.5)));
    for (std::size_t t = 1; t <= steps; ++t) {
      const double f = static_cast<double>(t) / static_cast<double>(steps);
      stamp(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y));
    }
  }
}

/// Replays a stroke journal in order; later strokes overwrite earlier ones.
inline SeedState replay_strokes(const std::vector<Stroke>& journal, std::size_t width, std::size_t height) {
  std::vector<std::uint8_t> mask(width * height, 0);
  for (const auto& s : journal) rasterize_stroke(s, mask, width, height);
  SeedState seeds(width * height);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 1) seeds.background.push_back({i, Provenance::user});
    if (mask[i] == 2) seeds.foreground.push_back({i, Provenance::user});
  }
  return seeds;
}

}  // namespace rwseg
