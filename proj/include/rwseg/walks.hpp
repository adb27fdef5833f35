#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rwseg/error.hpp"
#include "rwseg/graph.hpp"
#include "rwseg/image.hpp"
#include "rwseg/seeds.hpp"
#include "rwseg/solver.hpp"

namespace rwseg {

/// Per-pixel random-walker probabilities over the lattice.
///
/// `raw` is the solver output stitched with the seed values and may leave
/// [0,1] under the boundary term; `clamped` and `labels` are derived from it.
/// A pixel is foreground iff its clamped probability is strictly above 0.5.
struct ProbabilityMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> raw;
  std::vector<double> clamped;
  std::vector<std::uint8_t> labels;

  static ProbabilityMap from_raw(std::size_t width, std::size_t height, std::vector<double> raw) {
    if (raw.size() != width * height)
      throw Error(ErrorCode::dimension_mismatch, "probability buffer does not match dimensions");
    ProbabilityMap m;
    m.width = width;
    m.height = height;
    m.raw = std::move(raw);
    m.clamped.resize(m.raw.size());
    m.labels.resize(m.raw.size());
    for (std::size_t i = 0; i < m.raw.size(); ++i) {
      m.clamped[i] = std::clamp(m.raw[i], 0.0, 1.0);
      m.labels[i] = m.clamped[i] > 0.5 ? 1 : 0;
    }
    return m;
  }

  std::size_t size() const noexcept { return raw.size(); }

  friend bool operator==(const ProbabilityMap&, const ProbabilityMap&) = default;
};

/// Places p_u back on the lattice next to the fixed seed values.
inline ProbabilityMap stitch(const SparseLaplacian& lap, std::span<const double> pu) {
  std::vector<double> raw(lap.width * lap.height, 0.0);
  for (std::size_t row = 0; row < lap.unseeded.size(); ++row) raw[lap.unseeded[row]] = pu[row];
  for (std::size_t c = 0; c < lap.seeded.size(); ++c) raw[lap.seeded[c]] = lap.seed_values[c];
  return ProbabilityMap::from_raw(lap.width, lap.height, std::move(raw));
}

/// Solves the seeded system carried by `lap` (plain or boundary-modified).
inline ProbabilityMap solve_walks(const SparseLaplacian& lap, const SolveOptions& opts = {}) {
  const auto b = lap.rhs();
  const auto pu = solve_system(lap, b, opts);
  return stitch(lap, pu);
}

inline ProbabilityMap random_walks(const EdgeWeights& weights, const SeedState& seeds,
                                   const SolveOptions& opts = {}) {
  return solve_walks(assemble_laplacian(weights, seeds), opts);
}

inline ProbabilityMap random_walks(const ImageGrid& img, const SeedState& seeds, double beta = kDefaultBeta,
                                   double floor = kDefaultWeightFloor, const SolveOptions& opts = {}) {
  return random_walks(compute_weights(img, beta, floor), seeds, opts);
}

/// Boundary random walks: L'_u p_u = -R p_m - 0.5 lambda e with
/// L' = L - lambda diag(e) and e the indicator of `seeds.boundary`.
inline ProbabilityMap boundary_random_walks(const EdgeWeights& weights, const SeedState& seeds, double lambda,
                                            const SolveOptions& opts = {}) {
  if (!(lambda >= 0.0) || !(lambda <= weights.min_weight()))
    throw ConvexityViolation(lambda, weights.min_weight());
  auto lap = assemble_laplacian(weights, seeds);
  return solve_walks(apply_boundary_modification(lap, seeds.boundary, lambda), opts);
}

inline ProbabilityMap boundary_random_walks(const ImageGrid& img, const SeedState& seeds, double lambda,
                                            double beta = kDefaultBeta, double floor = kDefaultWeightFloor,
                                            const SolveOptions& opts = {}) {
  return boundary_random_walks(compute_weights(img, beta, floor), seeds, lambda, opts);
}

/// S_E = { unseeded i : |clamped p_i - 0.5| < delta }, ascending.
inline std::vector<std::size_t> boundary_set(const ProbabilityMap& map, const SeedState& seeds, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw Error(ErrorCode::invalid_input, "delta must lie in (0, 0.5)");
  if (seeds.pixel_count != map.size())
    throw Error(ErrorCode::dimension_mismatch, "seed state does not match probability map");
  const auto labels = seeds.label_map();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < map.size(); ++i)
    if (labels[i] == SeedLabel::none && std::abs(map.clamped[i] - 0.5) < delta) out.push_back(i);
  return out;
}

/// sum over edges of w_ij (p_i - p_j)^2
inline double dirichlet_energy(const EdgeWeights& weights, std::span<const double> p) {
  const std::size_t w = weights.width();
  const std::size_t h = weights.height();
  auto hw = weights.horizontal();
  auto vw = weights.vertical();
  double e = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x + 1 < w; ++x) {
      const double d = p[y * w + x] - p[y * w + x + 1];
      e += hw[y * (w - 1) + x] * d * d;
    }
  for (std::size_t y = 0; y + 1 < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double d = p[y * w + x] - p[(y + 1) * w + x];
      e += vw[y * w + x] * d * d;
    }
  return e;
}

/// BRW objective: Dirichlet energy - lambda * sum_{i in S_E} (p_i - 0.5)^2.
inline double brw_objective(const EdgeWeights& weights, std::span<const double> p,
                            std::span<const std::size_t> boundary, double lambda) {
  double penalty = 0.0;
  for (std::size_t i : boundary) penalty += (p[i] - 0.5) * (p[i] - 0.5);
  return dirichlet_energy(weights, p) - lambda * penalty;
}

}  // namespace rwseg
