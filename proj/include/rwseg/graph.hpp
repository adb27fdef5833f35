#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rwseg/csr.hpp"
#include "rwseg/error.hpp"
#include "rwseg/image.hpp"
#include "rwseg/seeds.hpp"

namespace rwseg {

inline constexpr double kDefaultBeta = 90.0;
// Keeps min(w_ij) at 0.01 so the default BRW trade-off (0.005) stays feasible.
inline constexpr double kDefaultWeightFloor = 1e-2;

/// Edge weights of the 4-connected lattice graph.
///
/// Horizontal edge (x,y)-(x+1,y) is stored at `horizontal[y*(width-1)+x]`,
/// vertical edge (x,y)-(x,y+1) at `vertical[y*width+x]`. Each undirected edge
/// is stored once, so w_ij == w_ji by construction.
class EdgeWeights {
 public:
  EdgeWeights() = default;

  /// Explicit weights on an arbitrary lattice (including 1xN strips).
  static EdgeWeights from_values(std::size_t width, std::size_t height, std::vector<double> horizontal,
                                 std::vector<double> vertical, double beta = 0.0, double floor = 0.0) {
    if (width == 0 || height == 0 || width * height < 2)
      throw Error(ErrorCode::invalid_input, "lattice needs at least two vertices");
    if (horizontal.size() != (width - 1) * height || vertical.size() != width * (height - 1))
      throw Error(ErrorCode::invalid_input, "edge weight arrays do not match lattice shape");
    EdgeWeights w;
    w.width_ = width;
    w.height_ = height;
    w.beta_ = beta;
    w.floor_ = floor;
    w.horizontal_ = std::move(horizontal);
    w.vertical_ = std::move(vertical);
    w.finish();
    return w;
  }

  static EdgeWeights uniform(std::size_t width, std::size_t height, double value) {
    std::size_t nh = (width - 1) * height;
    std::size_t nv = width * (height - 1);
    return from_values(width, height, std::vector<double>(nh, value), std::vector<double>(nv, value));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t vertex_count() const noexcept { return width_ * height_; }
  std::size_t edge_count() const noexcept { return horizontal_.size() + vertical_.size(); }
  double beta() const noexcept { return beta_; }
  double floor() const noexcept { return floor_; }
  double min_weight() const noexcept { return min_weight_; }
  std::span<const double> horizontal() const noexcept { return horizontal_; }
  std::span<const double> vertical() const noexcept { return vertical_; }

  /// Calls f(j, w_ij) for each lattice neighbour j of i in ascending j.
  template <typename F>
  void for_each_neighbor(std::size_t i, F&& f) const {
    const std::size_t x = i % width_;
    const std::size_t y = i / width_;
    if (y > 0) f(i - width_, vertical_[i - width_]);
    if (x > 0) f(i - 1, horizontal_[y * (width_ - 1) + x - 1]);
    if (x + 1 < width_) f(i + 1, horizontal_[y * (width_ - 1) + x]);
    if (y + 1 < height_) f(i + width_, vertical_[i]);
  }

  /// d_i = sum_j w_ij
  double degree(std::size_t i) const {
    double d = 0.0;
    for_each_neighbor(i, [&](std::size_t, double w) { d += w; });
    return d;
  }

  friend bool operator==(const EdgeWeights&, const EdgeWeights&) = default;

 private:
  void finish() {
    min_weight_ = std::numeric_limits<double>::infinity();
    for (auto* v : {&horizontal_, &vertical_})
      for (double w : *v) {
        if (!(w > 0.0) || !std::isfinite(w))
          throw Error(ErrorCode::invalid_input, "edge weights must be positive and finite");
        min_weight_ = std::min(min_weight_, w);
      }
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double beta_ = 0.0;
  double floor_ = 0.0;
  double min_weight_ = 0.0;
  std::vector<double> horizontal_;
  std::vector<double> vertical_;
};

/// w_ij = exp(-beta * (g_i - g_j)^2 / max_sq) + floor, where max_sq is the
/// largest squared difference over all lattice edges (the normalized
/// difference is taken as 0 on a constant image).
inline EdgeWeights compute_weights(const ImageGrid& img, double beta = kDefaultBeta,
                                   double floor = kDefaultWeightFloor) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::invalid_input, "beta must be >= 0");
  if (!(floor > 0.0) || !std::isfinite(floor)) throw Error(ErrorCode::invalid_input, "weight floor must be > 0");
  if (img.width() < 2 || img.height() < 2) throw Error(ErrorCode::invalid_input, "image smaller than 2x2");

  const std::size_t w = img.width();
  const std::size_t h = img.height();
  auto g = img.intensity();

  std::vector<double> hsq((w - 1) * h);
  std::vector<double> vsq(w * (h - 1));
  double max_sq = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x + 1 < w; ++x) {
      double d = g[y * w + x] - g[y * w + x + 1];
      hsq[y * (w - 1) + x] = d * d;
      max_sq = std::max(max_sq, d * d);
    }
  for (std::size_t y = 0; y + 1 < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double d = g[y * w + x] - g[(y + 1) * w + x];
      vsq[y * w + x] = d * d;
      max_sq = std::max(max_sq, d * d);
    }

  auto to_weight = [&](double sq) {
    double normalized = max_sq > 0.0 ? sq / max_sq : 0.0;
    return std::exp(-beta * normalized) + floor;
  };
  for (double& v : hsq) v = to_weight(v);
  for (double& v : vsq) v = to_weight(v);

  return EdgeWeights::from_values(w, h, std::move(hsq), std::move(vsq), beta, floor);
}

/// Laplacian blocks of the seeded lattice graph.
///
/// With lattice vertices split into unseeded (u) and seeded (m), the full
/// Laplacian reads [[L_u, R], [R^T, L_m]]. `lu` is L_u (n_u x n_u) and `r` is
/// the coupling block R (n_u x n_m), so the probabilities of the unseeded
/// vertices solve L_u p_u = -R p_m.
struct SparseLaplacian {
  std::size_t width = 0;
  std::size_t height = 0;
  CsrMatrix lu;
  CsrMatrix r;
  /// d_i per lattice vertex.
  std::vector<double> degree;
  /// Lattice index -> row of `lu`, or -1 for seeded vertices.
  std::vector<std::int64_t> vertex_index;
  /// Row of `lu` -> lattice index (row-major, seeds removed).
  std::vector<std::size_t> unseeded;
  /// Column of `r` -> lattice index.
  std::vector<std::size_t> seeded;
  /// p_m: 1 for foreground, 0 for background, per column of `r`.
  std::vector<double> seed_values;
  double min_weight = 0.0;
  /// BRW modification, if any: lambda and the per-row indicator e.
  double lambda = 0.0;
  std::vector<std::uint8_t> boundary_indicator;

  std::size_t n_unseeded() const noexcept { return unseeded.size(); }

  /// -R p_m - 0.5 lambda e
  std::vector<double> rhs() const {
    std::vector<double> b = r.multiply(seed_values);
    for (double& v : b) v = -v;
    if (lambda != 0.0)
      for (std::size_t i = 0; i < b.size(); ++i)
        if (boundary_indicator[i]) b[i] -= 0.5 * lambda;
    return b;
  }

  friend bool operator==(const SparseLaplacian&, const SparseLaplacian&) = default;
};

inline SparseLaplacian assemble_laplacian(const EdgeWeights& weights, const SeedState& seeds) {
  const std::size_t n = weights.vertex_count();
  if (seeds.pixel_count != n)
    throw Error(ErrorCode::dimension_mismatch, "seed state covers " + std::to_string(seeds.pixel_count) +
                                                   " pixels, lattice has " + std::to_string(n));
  if (seeds.foreground.empty() || seeds.background.empty())
    throw Error(ErrorCode::missing_seeds, "both foreground and background seeds are required");
  const auto labels = seeds.label_map();

  SparseLaplacian lap;
  lap.width = weights.width();
  lap.height = weights.height();
  lap.min_weight = weights.min_weight();
  lap.degree.resize(n);
  lap.vertex_index.assign(n, -1);
  std::vector<std::size_t> seed_column(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    lap.degree[v] = weights.degree(v);
    if (labels[v] == SeedLabel::none) {
      lap.vertex_index[v] = static_cast<std::int64_t>(lap.unseeded.size());
      lap.unseeded.push_back(v);
    } else {
      seed_column[v] = lap.seeded.size();
      lap.seeded.push_back(v);
      lap.seed_values.push_back(labels[v] == SeedLabel::foreground ? 1.0 : 0.0);
    }
  }

  const std::size_t nu = lap.unseeded.size();
  lap.lu.rows = lap.lu.cols = nu;
  lap.r.rows = nu;
  lap.r.cols = lap.seeded.size();
  lap.lu.row_ptr.assign(1, 0);
  lap.r.row_ptr.assign(1, 0);
  lap.lu.col.reserve(5 * nu);
  lap.lu.val.reserve(5 * nu);
  lap.boundary_indicator.assign(nu, 0);

  for (std::size_t row = 0; row < nu; ++row) {
    const std::size_t v = lap.unseeded[row];
    bool diagonal_placed = false;
    auto place_diagonal = [&] {
      lap.lu.col.push_back(row);
      lap.lu.val.push_back(lap.degree[v]);
      diagonal_placed = true;
    };
    weights.for_each_neighbor(v, [&](std::size_t j, double w) {
      if (j > v && !diagonal_placed) place_diagonal();
      if (lap.vertex_index[j] >= 0) {
        lap.lu.col.push_back(static_cast<std::size_t>(lap.vertex_index[j]));
        lap.lu.val.push_back(-w);
      } else {
        lap.r.col.push_back(seed_column[j]);
        lap.r.val.push_back(-w);
      }
    });
    if (!diagonal_placed) place_diagonal();
    lap.lu.row_ptr.push_back(lap.lu.col.size());
    lap.r.row_ptr.push_back(lap.r.col.size());
  }
  return lap;
}

/// L' = L - lambda diag(e): subtracts lambda from the diagonal of every row in
/// `boundary` (lattice indices of unseeded vertices). Rejects lambda outside
/// [0, min_weight].
inline SparseLaplacian apply_boundary_modification(const SparseLaplacian& lap,
                                                   std::span<const std::size_t> boundary, double lambda) {
  if (!(lambda >= 0.0) || !(lambda <= lap.min_weight)) throw ConvexityViolation(lambda, lap.min_weight);
  if (lap.lambda != 0.0) throw Error(ErrorCode::invalid_input, "laplacian already carries a boundary term");
  SparseLaplacian out = lap;
  if (lambda == 0.0 || boundary.empty()) return out;
  out.lambda = lambda;
  for (std::size_t v : boundary) {
    if (v >= out.vertex_index.size())
      throw Error(ErrorCode::invalid_input, "boundary index outside lattice");
    std::int64_t row = out.vertex_index[v];
    if (row < 0)
      throw Error(ErrorCode::conflicting_seeds, "boundary pixel " + std::to_string(v) + " is a seed");
    auto r = static_cast<std::size_t>(row);
    if (out.boundary_indicator[r]) continue;
    out.boundary_indicator[r] = 1;
    for (std::size_t k = out.lu.row_ptr[r]; k < out.lu.row_ptr[r + 1]; ++k)
      if (out.lu.col[k] == r) out.lu.val[k] -= lambda;
  }
  return out;
}

}  // namespace rwseg
