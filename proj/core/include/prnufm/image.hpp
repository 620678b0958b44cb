#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace prnufm {

// Single-channel real raster, row-major. Frames, noise residuals and
// fingerprints all travel as GrayImage. Samples are unconstrained in range
// (residuals are signed) but always finite.
class GrayImage {
 public:
  GrayImage() = default;

  // Zero-filled raster. Throws kInvalidArgument for empty dimensions.
  GrayImage(int width, int height);
  GrayImage(int width, int height, double fill);

  // Takes ownership of `data`; validates length and finiteness.
  GrayImage(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<double> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const double> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }

  bool same_shape(const GrayImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Throws kDimensionMismatch naming `what` when the shapes differ.
void require_same_shape(const GrayImage& a, const GrayImage& b, const char* what);

// Throws kDegenerateInput if any sample is NaN or infinite.
void require_finite(std::span<const double> samples, const char* what);

double mean(const GrayImage& img) noexcept;
double energy(const GrayImage& img) noexcept;  // sum of squares

// Pearson correlation of two same-shape rasters. Returns 0 when either
// input has zero variance.
double correlation(const GrayImage& a, const GrayImage& b);

// Central sub-rectangle covering `fraction` of each dimension.
GrayImage center_crop(const GrayImage& img, double fraction);

// Integer-offset crop with zero fill for out-of-range pixels.
GrayImage crop(const GrayImage& img, int x0, int y0, int width, int height);

}  // namespace prnufm
