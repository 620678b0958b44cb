#include "prnufm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prnufm/error.hpp"
#include "prnufm/geometry.hpp"

namespace prnufm {

using fft::Complex;

Spectrum::Spectrum(int n) : n_(n), data_(static_cast<std::size_t>(n) * n) {}

bool Spectrum::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& c) { return c == Complex{}; });
}

int signed_lag(int index, int n) noexcept {
  int i = index % n;
  if (i < 0) i += n;
  return i > n / 2 ? i - n : i;
}

Spectrum fft2_padded(const GrayImage& img, int fft_size, Anchor anchor) {
  if (!fft::is_power_of_two(fft_size) || fft_size < std::max(img.width(), img.height())) {
    throw Error(ErrorCode::kSizeTooSmall,
                "fft size " + std::to_string(fft_size) + " must be a power of two >= " +
                    std::to_string(std::max(img.width(), img.height())));
  }
  const int n = fft_size;
  const Pivot pv = anchor == Anchor::kCentered ? pivot_of(img.width(), img.height()) : Pivot{};
  fft::AlignedVector<Complex> canvas(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < img.height(); ++y) {
    const int cy = ((y - pv.y) % n + n) % n;
    const auto src = img.row(y);
    for (int x = 0; x < img.width(); ++x) {
      const int cx = ((x - pv.x) % n + n) % n;
      canvas[static_cast<std::size_t>(cy) * n + cx] = src[x];
    }
  }
  fft::transform_2d(canvas, n, n, fft::Direction::kForward);

  Spectrum out(n);
  const int h = n / 2;
  for (int ky = 0; ky < n; ++ky) {
    const int sy = (ky + h) % n;
    for (int kx = 0; kx < n; ++kx) {
      out.at((kx + h) % n, sy) = canvas[static_cast<std::size_t>(ky) * n + kx];
    }
  }
  return out;
}

PhaseCorrelation phase_correlate(const Spectrum& a, const Spectrum& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "phase_correlate needs equal spectrum sizes");
  }
  if (a.is_zero() || b.is_zero()) {
    throw Error(ErrorCode::kDegenerateInput, "phase_correlate on an all-zero spectrum");
  }
  const int n = a.size();
  const int h = n / 2;
  fft::AlignedVector<Complex> cross(static_cast<std::size_t>(n) * n);
  double max_mag = 0.0;
  // Undo the quadrant swap while forming B * conj(A).
  for (int ky = 0; ky < n; ++ky) {
    for (int kx = 0; kx < n; ++kx) {
      const Complex v = b.at(kx, ky) * std::conj(a.at(kx, ky));
      cross[static_cast<std::size_t>((ky + h) % n) * n + (kx + h) % n] = v;
      max_mag = std::max(max_mag, std::abs(v));
    }
  }
  const double eps = 1e-12 * max_mag;
  for (auto& v : cross) v /= (std::abs(v) + eps);
  fft::transform_2d(cross, n, n, fft::Direction::kInverse);

  PhaseCorrelation out;
  out.plane = GrayImage(n, n);
  const double norm = 1.0 / (static_cast<double>(n) * n);
  auto px = out.plane.pixels();
  std::size_t best = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = cross[i].real() * norm;
    if (px[i] > px[best]) best = i;
  }
  out.value = px[best];
  out.peak = Shift2{signed_lag(static_cast<int>(best % n), n), signed_lag(static_cast<int>(best / n), n)};
  return out;
}

PceResult pce(const GrayImage& w, const GrayImage& ref, const PceOptions& opts) {
  require_same_shape(w, ref, "pce");
  const int cols = w.width();
  const int rows = w.height();
  const std::size_t count = w.size();

  auto normalized = [&](const GrayImage& img, const char* name) {
    fft::AlignedVector<double> out(img.pixels().begin(), img.pixels().end());
    const double m = mean(img);
    double e = 0.0;
    for (double& v : out) {
      v -= m;
      e += v * v;
    }
    if (!(e > 0.0)) throw Error(ErrorCode::kDegenerateInput, std::string(name) + " has zero energy");
    const double s = 1.0 / std::sqrt(e);
    for (double& v : out) v *= s;
    return out;
  };
  const auto wn = normalized(w, "pce residual");
  const auto rn = normalized(ref, "pce reference");

  const int half_cols = cols / 2 + 1;
  fft::AlignedVector<Complex> fw(static_cast<std::size_t>(rows) * half_cols);
  fft::AlignedVector<Complex> fr(fw.size());
  fft::forward_real_2d(wn, fw, rows, cols);
  fft::forward_real_2d(rn, fr, rows, cols);
  for (std::size_t i = 0; i < fw.size(); ++i) fw[i] *= std::conj(fr[i]);
  fft::AlignedVector<double> plane(count);
  fft::inverse_real_2d(fw, plane, rows, cols);
  const double norm = 1.0 / static_cast<double>(count);
  std::size_t best = 0;
  for (std::size_t i = 0; i < count; ++i) {
    plane[i] *= norm;
    if (plane[i] > plane[best]) best = i;
  }
  const int bx = static_cast<int>(best % cols);
  const int by = static_cast<int>(best / cols);
  const int r = std::max(0, opts.exclusion / 2);

  double acc = 0.0;
  std::size_t kept = 0;
  for (int y = 0; y < rows; ++y) {
    int dy = std::abs(y - by);
    dy = std::min(dy, rows - dy);
    for (int x = 0; x < cols; ++x) {
      int dx = std::abs(x - bx);
      dx = std::min(dx, cols - dx);
      if (dx <= r && dy <= r) continue;
      const double v = plane[static_cast<std::size_t>(y) * cols + x];
      acc += v * v;
      ++kept;
    }
  }
  PceResult out;
  out.peak_value = plane[best];
  out.peak_pos = Shift2{signed_lag(bx, cols), signed_lag(by, rows)};
  out.plane_energy = kept > 0 ? acc / static_cast<double>(kept) : 0.0;
  if (out.peak_value > 0.0 && out.plane_energy > 0.0) {
    out.pce = out.peak_value * out.peak_value / out.plane_energy;
  }
  return out;
}

}  // namespace prnufm
