#pragma once

#include <array>

#include "prnufm/image.hpp"

namespace prnufm {

// Similarity transform x' = s R(angle) x + shift, with coordinates taken
// relative to the image center (see warp()). Angles are degrees at the API
// boundary; positive shift_x moves content rightward, positive shift_y
// moves it down.
struct SimilarityParams {
  double scale = 1.0;
  double angle = 0.0;
  double shift_x = 0.0;
  double shift_y = 0.0;

  static SimilarityParams identity() noexcept { return {}; }

  // Throws kInvalidArgument unless scale > 0 and all fields are finite.
  // The angle is normalized into (-180, 180].
  SimilarityParams normalized() const;

  friend bool operator==(const SimilarityParams&, const SimilarityParams&) = default;
};

using Matrix2x3 = std::array<std::array<double, 3>, 2>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  bool degenerate() const noexcept { return lo == hi; }
  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
  double width() const noexcept { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct SearchRanges {
  Interval scale{0.9, 1.1};
  Interval angle{-3.0, 3.0};  // degrees
  Interval shift{-90.0, 90.0};  // pixels, applied to each axis

  // Throws kInvalidConfig when an interval is empty or the scale range
  // reaches zero.
  void validate() const;

  friend bool operator==(const SearchRanges&, const SearchRanges&) = default;
};

double normalize_angle_deg(double degrees) noexcept;
constexpr double deg_to_rad(double d) noexcept { return d * 0.017453292519943295; }
constexpr double rad_to_deg(double r) noexcept { return r * 57.29577951308232; }

Matrix2x3 to_matrix(const SimilarityParams& p);

// Composition a∘b (apply b first, then a).
Matrix2x3 compose(const Matrix2x3& a, const Matrix2x3& b) noexcept;

SimilarityParams invert(const SimilarityParams& p);

// Pixel coordinate treated as the transform origin: (width/2, height/2),
// rounded down. The same pivot is the FFT origin in the centered spectral
// embedding, which keeps rotation/scaling a pure log-polar shift.
struct Pivot {
  int x = 0;
  int y = 0;
};
Pivot pivot_of(int width, int height) noexcept;

// Resamples `img` through the inverse of `p` with bilinear interpolation.
// Output pixel (x, y) reads img at p^{-1}((x, y) - pivot) + pivot;
// anything outside the source is zero.
GrayImage warp(const GrayImage& img, const SimilarityParams& p, int out_width, int out_height);
inline GrayImage warp(const GrayImage& img, const SimilarityParams& p) {
  return warp(img, p, img.width(), img.height());
}

// Integer zero-fill translation: out(x, y) = img(x - dx, y - dy).
GrayImage translate(const GrayImage& img, int dx, int dy);

}  // namespace prnufm
