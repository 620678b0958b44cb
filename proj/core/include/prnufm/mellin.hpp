#pragma once

#include <optional>
#include <span>

#include "prnufm/fft.hpp"
#include "prnufm/geometry.hpp"
#include "prnufm/image.hpp"
#include "prnufm/spectral.hpp"

namespace prnufm {

// Sampling lattice over (log-radius, angle) of a centered spectrum.
// Row i sits at radius exp(rho_min + i * rho_step()) frequency bins; column
// j at angle j * alpha_step() degrees, covering [0, alpha_span).
struct LogPolarGrid {
  int n_rho = 0;
  int n_alpha = 0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double alpha_span = 180.0;

  struct Options {
    double max_scale_step = 1.002;  // upper bound on exp(rho_step)
    double max_alpha_step = 0.08;   // degrees
  };

  // rho in [log 2, log(fft_size / 2)]: the lower bound keeps the DC bin and
  // its immediate neighbours out of every row. n_rho is the smallest count
  // meeting max_scale_step; n_alpha the smallest meeting max_alpha_step.
  static LogPolarGrid for_fft_size(int fft_size, const Options& opts);
  static LogPolarGrid for_fft_size(int fft_size) { return for_fft_size(fft_size, Options{}); }

  double rho_step() const noexcept { return (rho_max - rho_min) / (n_rho - 1); }
  double alpha_step() const noexcept { return alpha_span / n_alpha; }
  double radius(int row) const noexcept;

  // kInvalidArgument unless n_rho, n_alpha >= 2 and rho_min < rho_max.
  void validate() const;

  // Rows spanning the same fraction of the rho axis as `samples` out of
  // `reference_rows` (a nominal 2896-row axis), at least 2.
  int rows_for_fraction(double samples, double reference_rows = 2896.0) const;

  friend bool operator==(const LogPolarGrid&, const LogPolarGrid&) = default;
};

// Complex samples over a contiguous band of grid rows.
struct LogPolarSpectrum {
  LogPolarGrid grid;
  int crop_offset = 0;  // first grid row held
  int rows = 0;
  fft::AlignedVector<fft::ComplexF> data;  // rows x grid.n_alpha

  fft::ComplexF at(int row, int col) const noexcept {
    return data[static_cast<std::size_t>(row) * grid.n_alpha + col];
  }
  std::span<const fft::ComplexF> row(int r) const noexcept {
    return {data.data() + static_cast<std::size_t>(r) * grid.n_alpha,
            static_cast<std::size_t>(grid.n_alpha)};
  }
};

// Bilinear (real and imaginary parts separately) log-polar resampling of a
// centered spectrum. Samples falling off the spectrum are zero. The
// optional band restricts the computation to rows [first_row,
// first_row + row_count).
LogPolarSpectrum log_polar_map(const Spectrum& spec, const LogPolarGrid& grid, int first_row = 0,
                               int row_count = -1);

// Classic Fourier-Mellin: log-polar map of the spectrum magnitude.
LogPolarSpectrum classic_fm(const GrayImage& img, int fft_size, const LogPolarGrid& grid);

// First row of the delta_rho band centered on crop_center, clamped so the
// band stays inside the grid. Throws kBadCrop for delta_rho outside
// [1, n_rho] or a crop_center outside the grid.
int crop_window_offset(const LogPolarGrid& grid, int delta_rho, int crop_center);

// Phase-bearing transform: log-polar map of the complex spectrum of `img`
// (centered anchoring), keeping delta_rho rows around crop_center.
LogPolarSpectrum mfm(const GrayImage& img, int fft_size, const LogPolarGrid& grid, int delta_rho,
                     int crop_center);
LogPolarSpectrum mfm(const Spectrum& centered_spectrum, const LogPolarGrid& grid, int delta_rho,
                     int crop_center);

// Row of maximal energy sum_alpha |.|^2; earliest row on ties. Expects an
// uncropped map (crop_offset 0); the returned index is a grid row.
int crop_center_from_fingerprint(const LogPolarSpectrum& fp_lp);

struct ScaleRotation {
  double scale = 1.0;
  double angle = 0.0;  // degrees, in (-90, 90]
  double peak = 0.0;   // phase-correlation value at the integer peak
  double rho_lag = 0.0;    // refined peak position, grid rows
  double alpha_lag = 0.0;  // refined peak position, grid columns
};

// Phase correlation of log-polar bands against a fixed reference band.
// The reference transform is computed once; estimate() may be called
// concurrently. When `ranges` is given the peak is only sought over lags
// whose scale and angle fall inside them.
class LogPolarCorrelator {
 public:
  LogPolarCorrelator(const LogPolarSpectrum& reference, std::optional<SearchRanges> ranges = {});

  // `query` holds rows x n_alpha samples laid out like the reference.
  ScaleRotation estimate(std::span<const fft::ComplexF> query) const;
  ScaleRotation estimate(const LogPolarSpectrum& query) const;

  // Same, on a caller-owned padded_rows() x n_alpha buffer whose first
  // rows() rows hold the query and the rest zeros. The buffer is consumed.
  ScaleRotation estimate_in_place(fft::AlignedVector<fft::ComplexF>& work) const;

  int rows() const noexcept { return rows_; }
  int padded_rows() const noexcept { return padded_rows_; }
  const LogPolarGrid& grid() const noexcept { return grid_; }

 private:
  struct LagWindow {
    int rho_lo, rho_hi;      // inclusive search bounds, in lags
    int alpha_lo, alpha_hi;
  };

  LogPolarGrid grid_;
  int crop_offset_ = 0;
  int rows_ = 0;
  int padded_rows_ = 0;
  std::optional<LagWindow> window_;
  fft::AlignedVector<fft::ComplexF> reference_conj_;  // conj(FFT(reference))
};

// Scale and rotation mapping the reference band onto the query band:
// query ~ warp(reference, {scale, angle}). Both inputs must share grid,
// crop offset and row count (kInvalidArgument otherwise); throws
// kDegenerateInput for an all-zero input.
ScaleRotation estimate_scale_rotation(const LogPolarSpectrum& query, const LogPolarSpectrum& reference,
                                      std::optional<SearchRanges> ranges = {});

// Vectorizable sin/cos with absolute error below 1e-5 for |x| < 1e4.
inline void fast_sincos(float x, float& s, float& c) noexcept {
  constexpr float kInvTwoPi = 0.15915494309189535f;
  constexpr float kTwoPiHi = 6.28125f;  // exact in float
  constexpr float kTwoPiLo = 1.9353071795864769e-3f;
  const float t = x * kInvTwoPi;
  const float k = static_cast<float>(static_cast<int>(t + (t >= 0.f ? 0.5f : -0.5f)));
  const float r = (x - k * kTwoPiHi) - k * kTwoPiLo;  // r in [-pi, pi]
  // Half-angle Taylor series on [-pi/2, pi/2], then double-angle.
  const float h = 0.5f * r;
  const float h2 = h * h;
  const float sh =
      h * (1.f + h2 * (-1.f / 6 + h2 * (1.f / 120 + h2 * (-1.f / 5040 + h2 * (1.f / 362880 - h2 / 39916800)))));
  const float ch = 1.f + h2 * (-0.5f + h2 * (1.f / 24 + h2 * (-1.f / 720 + h2 * (1.f / 40320 - h2 / 3628800))));
  s = 2.f * sh * ch;
  c = ch * ch - sh * sh;
}

// Plain complex product; std::complex's operator* carries NaN recovery
// that blocks vectorization.
inline fft::ComplexF mul(fft::ComplexF a, fft::ComplexF b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace prnufm
