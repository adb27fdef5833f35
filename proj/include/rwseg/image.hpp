#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rwseg/error.hpp"

namespace rwseg {

/// Rec. 601 luma.
inline double luma601(double r, double g, double b) noexcept {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

/// Rectangular lattice of normalized intensities, row-major.
/// Color images keep their RGB channels for display; the segmentation only
/// ever looks at `intensity`.
class ImageGrid {
 public:
  ImageGrid() = default;

  ImageGrid(std::size_t width, std::size_t height, std::vector<double> intensity)
      : width_(width), height_(height), intensity_(std::move(intensity)) {
    validate();
  }

  static ImageGrid from_rgb(std::size_t width, std::size_t height, std::vector<double> rgb) {
    if (rgb.size() != 3 * width * height)
      throw Error(ErrorCode::invalid_input, "rgb buffer size does not match dimensions");
    std::vector<double> gray(width * height);
    for (std::size_t i = 0; i < gray.size(); ++i)
      gray[i] = luma601(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
    ImageGrid img(width, height, std::move(gray));
    for (double c : rgb)
      if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorCode::invalid_input, "rgb channel outside [0,1]");
    img.rgb_ = std::move(rgb);
    return img;
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return intensity_.size(); }

  double operator()(std::size_t x, std::size_t y) const { return intensity_[y * width_ + x]; }
  std::span<const double> intensity() const noexcept { return intensity_; }

  bool has_color() const noexcept { return !rgb_.empty(); }
  /// Interleaved RGB in [0,1]; empty for grayscale sources.
  std::span<const double> rgb() const noexcept { return rgb_; }

 private:
  void validate() const {
    if (width_ < 2 || height_ < 2)
      throw Error(ErrorCode::invalid_input, "image must be at least 2x2, got " +
                                                std::to_string(width_) + "x" + std::to_string(height_));
    if (intensity_.size() != width_ * height_)
      throw Error(ErrorCode::invalid_input, "intensity buffer size does not match dimensions");
    for (double g : intensity_)
      if (!(g >= 0.0 && g <= 1.0)) throw Error(ErrorCode::invalid_input, "intensity outside [0,1]");
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> intensity_;
  std::vector<double> rgb_;
};

}  // namespace rwseg
