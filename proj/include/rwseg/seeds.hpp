#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rwseg/error.hpp"

namespace rwseg {

enum class SeedLabel : std::uint8_t { none = 0, background = 1, foreground = 2 };

enum class Provenance : std::uint8_t { user, automatic };

struct Seed {
  std::size_t index = 0;
  Provenance origin = Provenance::user;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Marked pixels of one segmentation problem: foreground S_F, background S_B
/// and boundary S_E, over a lattice of `pixel_count` vertices.
///
/// The sets are kept sorted by pixel index. Nothing here forbids overlapping
/// sets; `validate()` (and laplacian assembly) rejects them.
struct SeedState {
  std::size_t pixel_count = 0;
  std::vector<Seed> foreground;
  std::vector<Seed> background;
  std::vector<std::size_t> boundary;

  SeedState() = default;
  explicit SeedState(std::size_t n) : pixel_count(n) {}

  static SeedState from_indices(std::size_t n, const std::vector<std::size_t>& fg,
                                const std::vector<std::size_t>& bg,
                                Provenance origin = Provenance::user) {
    SeedState s(n);
    for (auto i : fg) s.foreground.push_back({i, origin});
    for (auto i : bg) s.background.push_back({i, origin});
    s.normalize();
    return s;
  }

  void add_foreground(std::size_t index, Provenance origin = Provenance::user) {
    insert_sorted(foreground, {index, origin});
  }
  void add_background(std::size_t index, Provenance origin = Provenance::user) {
    insert_sorted(background, {index, origin});
  }

  void set_boundary(std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    boundary = std::move(indices);
  }

  std::size_t seeded_count() const noexcept { return foreground.size() + background.size(); }

  /// Sort and drop duplicate indices (first occurrence wins).
  void normalize() {
    auto fix = [](std::vector<Seed>& v) {
      std::stable_sort(v.begin(), v.end(), [](const Seed& a, const Seed& b) { return a.index < b.index; });
      v.erase(std::unique(v.begin(), v.end(),
                          [](const Seed& a, const Seed& b) { return a.index == b.index; }),
              v.end());
    };
    fix(foreground);
    fix(background);
    set_boundary(std::move(boundary));
  }

  /// Per-pixel seed code. Throws on out-of-range indices or S_F/S_B overlap.
  std::vector<SeedLabel> label_map() const {
    std::vector<SeedLabel> labels(pixel_count, SeedLabel::none);
    for (const auto& s : background) {
      check_index(s.index);
      labels[s.index] = SeedLabel::background;
    }
    for (const auto& s : foreground) {
      check_index(s.index);
      if (labels[s.index] == SeedLabel::background)
        throw Error(ErrorCode::conflicting_seeds,
                    "pixel " + std::to_string(s.index) + " is both foreground and background");
      labels[s.index] = SeedLabel::foreground;
    }
    return labels;
  }

  /// Checks disjointness of S_F, S_B and S_E, and index ranges.
  void validate() const {
    auto labels = label_map();
    for (auto i : boundary) {
      check_index(i);
      if (labels[i] != SeedLabel::none)
        throw Error(ErrorCode::conflicting_seeds,
                    "boundary pixel " + std::to_string(i) + " is also a seed");
    }
  }

  std::vector<std::size_t> foreground_indices() const { return indices_of(foreground); }
  std::vector<std::size_t> background_indices() const { return indices_of(background); }

 private:
  static std::vector<std::size_t> indices_of(const std::vector<Seed>& v) {
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(s.index);
    return out;
  }

  static void insert_sorted(std::vector<Seed>& v, Seed s) {
    auto it = std::lower_bound(v.begin(), v.end(), s.index,
                               [](const Seed& a, std::size_t i) { return a.index < i; });
    if (it != v.end() && it->index == s.index) return;
    v.insert(it, s);
  }

  void check_index(std::size_t i) const {
    if (i >= pixel_count)
      throw Error(ErrorCode::invalid_input, "seed index " + std::to_string(i) + " outside lattice of " +
                                                std::to_string(pixel_count) + " pixels");
  }
};

}  // namespace rwseg
