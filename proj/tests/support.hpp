#pragma once

// Test-only helpers: random instances and a dense full-lattice reference
// solver that shares no code with the library's assembly or solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwseg/rwseg.hpp"

namespace rwtest {

using rwseg::EdgeWeights;
using rwseg::ImageGrid;
using rwseg::SeedState;

/// Edge weights straight from the formula, indexed by unordered pixel pair.
struct ReferenceWeights {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> right;  // (x, y) -- (x + 1, y), size w * h, unused at x = w - 1
  std::vector<double> down;   // (x, y) -- (x, y + 1), size w * h, unused at y = h - 1
};

inline ReferenceWeights reference_weights(const std::vector<double>& g, std::size_t w, std::size_t h, double beta,
                                          double floor) {
  double max_sq = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w) max_sq = std::max(max_sq, std::pow(g[y * w + x] - g[y * w + x + 1], 2));
      if (y + 1 < h) max_sq = std::max(max_sq, std::pow(g[y * w + x] - g[(y + 1) * w + x], 2));
    }
  ReferenceWeights r{w, h, std::vector<double>(w * h, 0.0), std::vector<double>(w * h, 0.0)};
  auto wt = [&](double a, double b) {
    const double d = max_sq > 0.0 ? std::pow(a - b, 2) / max_sq : 0.0;
    return std::exp(-beta * d) + floor;
  };
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w) r.right[y * w + x] = wt(g[y * w + x], g[y * w + x + 1]);
      if (y + 1 < h) r.down[y * w + x] = wt(g[y * w + x], g[(y + 1) * w + x]);
    }
  return r;
}

inline ReferenceWeights reference_weights(const EdgeWeights& ew) {
  const std::size_t w = ew.width(), h = ew.height();
  ReferenceWeights r{w, h, std::vector<double>(w * h, 0.0), std::vector<double>(w * h, 0.0)};
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x + 1 < w; ++x) r.right[y * w + x] = ew.horizontal()[y * (w - 1) + x];
  for (std::size_t y = 0; y + 1 < h; ++y)
    for (std::size_t x = 0; x < w; ++x) r.down[y * w + x] = ew.vertical()[y * w + x];
  return r;
}

/// Gaussian elimination with complete row scan, in place.
inline std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[best * n + c])) best = r;
    if (a[best * n + c] == 0.0) throw std::runtime_error("reference system is singular");
    for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[best * n + k]);
    std::swap(b[c], b[best]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r * n + c] / a[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i * n + i];
  return b;
}

/// Full-lattice probabilities: seeded rows pin p to 0/1, other rows state
/// sum_j w_ij (p_i - p_j) - lambda [i in S_E] (p_i - 0.5) = 0.
inline std::vector<double> reference_probabilities(const ReferenceWeights& rw, const std::vector<std::size_t>& fg,
                                                   const std::vector<std::size_t>& bg,
                                                   const std::vector<std::size_t>& boundary = {},
                                                   double lambda = 0.0) {
  const std::size_t w = rw.width, h = rw.height, n = w * h;
  std::vector<double> a(n * n, 0.0), b(n, 0.0);
  std::vector<int> fixed(n, -1);
  for (auto i : fg) fixed[i] = 1;
  for (auto i : bg) fixed[i] = 0;
  std::vector<char> in_e(n, 0);
  for (auto i : boundary) in_e[i] = 1;
  auto couple = [&](std::size_t i, std::size_t j, double wij) {
    a[i * n + i] += wij;
    a[i * n + j] -= wij;
    a[j * n + j] += wij;
    a[j * n + i] -= wij;
  };
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (x + 1 < w) couple(i, i + 1, rw.right[i]);
      if (y + 1 < h) couple(i, i + w, rw.down[i]);
    }
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i] >= 0) {
      for (std::size_t k = 0; k < n; ++k) a[i * n + k] = 0.0;
      a[i * n + i] = 1.0;
      b[i] = fixed[i];
    } else if (in_e[i]) {
      a[i * n + i] -= lambda;
      b[i] = -0.5 * lambda;
    }
  }
  return gauss_solve(std::move(a), std::move(b));
}

struct Instance {
  ImageGrid image;
  EdgeWeights weights;
  std::vector<std::size_t> fg;
  std::vector<std::size_t> bg;
  SeedState seeds;
};

enum class ImageModel { uniform_noise, two_tone, smooth };

inline ImageGrid random_image(std::mt19937_64& rng, std::size_t w, std::size_t h, ImageModel model) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> g(w * h);
  switch (model) {
    case ImageModel::uniform_noise:
      for (auto& v : g) v = u(rng);
      break;
    case ImageModel::two_tone: {
      const double cx = u(rng) * w, cy = u(rng) * h, r = 1.0 + u(rng) * std::max(w, h) / 2.0;
      const double in = u(rng), out = u(rng), s = 0.02 + 0.1 * u(rng);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = static_cast<double>(i % w), y = static_cast<double>(i / w);
        const double v = (std::hypot(x - cx, y - cy) < r ? in : out) + s * (2.0 * u(rng) - 1.0);
        g[i] = std::clamp(v, 0.0, 1.0);
      }
      break;
    }
    case ImageModel::smooth: {
      const double a = u(rng), b = u(rng), c = u(rng), s = 0.05 * u(rng);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = static_cast<double>(i % w) / w, y = static_cast<double>(i / w) / h;
        g[i] = std::clamp(0.5 * (a * x + b * y * y) + 0.25 * c * std::sin(6.0 * x * y) + s * u(rng), 0.0, 1.0);
      }
      break;
    }
  }
  return ImageGrid(w, h, std::move(g));
}

/// Image of 2..max_side per side (at least 3 pixels), with 1..n/6 seeds per
/// class at distinct random pixels.
inline Instance random_instance(std::mt19937_64& rng, std::size_t max_side = 16) {
  const std::size_t w = 2 + rng() % (max_side - 1);
  const std::size_t h = 2 + rng() % (max_side - 1);
  const auto model = static_cast<ImageModel>(rng() % 3);
  auto img = random_image(rng, w, h, model);
  auto weights = rwseg::compute_weights(img);
  const std::size_t n = w * h;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t cap = std::max<std::size_t>(1, n / 6);
  std::size_t kf = 1 + rng() % cap, kb = 1 + rng() % cap;
  if (kf + kb >= n) kf = kb = 1;
  std::vector<std::size_t> fg(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kf));
  std::vector<std::size_t> bg(idx.begin() + static_cast<std::ptrdiff_t>(kf),
                              idx.begin() + static_cast<std::ptrdiff_t>(kf + kb));
  auto seeds = SeedState::from_indices(n, fg, bg);
  return {std::move(img), std::move(weights), std::move(fg), std::move(bg), std::move(seeds)};
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("rwseg_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace rwtest
