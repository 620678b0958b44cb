#pragma once

#include <vector>

#include "prnufm/fft.hpp"
#include "prnufm/image.hpp"

namespace prnufm {

// Where the image sits on the zero-padded FFT canvas.
//   kTopLeft: pixel (0,0) at canvas (0,0).
//   kCentered: the geometric pivot (pivot_of) at canvas (0,0), the rest
//   wrapped circularly. Rotation and scaling about the pivot then act on
//   the complex spectrum as pure coordinate changes, with no phase ramp.
enum class Anchor { kTopLeft, kCentered };

// Square complex spectrum with DC at (n/2, n/2).
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(int n);

  int size() const noexcept { return n_; }
  fft::Complex& at(int kx, int ky) noexcept { return data_[static_cast<std::size_t>(ky) * n_ + kx]; }
  const fft::Complex& at(int kx, int ky) const noexcept {
    return data_[static_cast<std::size_t>(ky) * n_ + kx];
  }
  std::span<fft::Complex> bins() noexcept { return data_; }
  std::span<const fft::Complex> bins() const noexcept { return data_; }
  bool is_zero() const noexcept;

 private:
  int n_ = 0;
  fft::AlignedVector<fft::Complex> data_;
};

// Zero-pads `img` onto an fft_size x fft_size canvas, transforms, and
// swaps quadrants so DC is centered. Throws kSizeTooSmall when fft_size is
// not a power of two or smaller than the image.
Spectrum fft2_padded(const GrayImage& img, int fft_size, Anchor anchor = Anchor::kTopLeft);

struct Shift2 {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Shift2&, const Shift2&) = default;
};

struct PhaseCorrelation {
  Shift2 peak;         // displacement of B relative to A, in (-n/2, n/2]
  double value = 0.0;  // correlation at the peak; 1 for identical inputs
  GrayImage plane;     // n x n, zero lag at (0, 0)
};

// Inverse FFT of the normalized cross-power spectrum. Throws
// kDegenerateInput if either spectrum is identically zero.
PhaseCorrelation phase_correlate(const Spectrum& a, const Spectrum& b);

struct PceResult {
  double pce = 0.0;
  Shift2 peak_pos;          // displacement of W relative to the reference
  double peak_value = 0.0;  // normalized correlation at the peak
  double plane_energy = 0.0;  // mean squared correlation outside the peak window
};

struct PceOptions {
  int exclusion = 11;  // side of the square excluded around the peak
};

// Peak-to-correlation energy of the circular normalized cross-correlation
// between `w` and `ref`. The peak is the raw (signed) maximum; a
// non-positive peak gives PCE 0. Throws kDimensionMismatch or
// kDegenerateInput (zero-energy input).
PceResult pce(const GrayImage& w, const GrayImage& ref, const PceOptions& opts = {});

// Wraps a circular index into the signed range (-n/2, n/2].
int signed_lag(int index, int n) noexcept;

}  // namespace prnufm
