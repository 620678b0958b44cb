#include "prnufm/mellin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "prnufm/error.hpp"

namespace prnufm {

using fft::ComplexF;

LogPolarGrid LogPolarGrid::for_fft_size(int fft_size, const Options& opts) {
  if (!fft::is_power_of_two(fft_size) || fft_size < 8) {
    throw Error(ErrorCode::kSizeTooSmall, "log-polar grid needs a power-of-two fft size >= 8");
  }
  if (!(opts.max_scale_step > 1.0) || !(opts.max_alpha_step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid resolution bounds must be positive");
  }
  LogPolarGrid g;
  g.rho_min = std::log(2.0);
  g.rho_max = std::log(fft_size / 2.0);
  g.n_rho = static_cast<int>(std::ceil((g.rho_max - g.rho_min) / std::log(opts.max_scale_step))) + 1;
  g.n_alpha = static_cast<int>(std::ceil(g.alpha_span / opts.max_alpha_step));
  g.validate();
  return g;
}

double LogPolarGrid::radius(int row) const noexcept { return std::exp(rho_min + row * rho_step()); }

void LogPolarGrid::validate() const {
  if (n_rho < 2 || n_alpha < 2 || !(rho_min < rho_max) || !(alpha_span > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid log-polar grid");
  }
}

int LogPolarGrid::rows_for_fraction(double samples, double reference_rows) const {
  const int rows = static_cast<int>(std::lround(n_rho * samples / reference_rows));
  return std::clamp(rows, 2, n_rho);
}

LogPolarSpectrum log_polar_map(const Spectrum& spec, const LogPolarGrid& grid, int first_row,
                               int row_count) {
  grid.validate();
  if (row_count < 0) row_count = grid.n_rho - first_row;
  if (first_row < 0 || row_count < 1 || first_row + row_count > grid.n_rho) {
    throw Error(ErrorCode::kBadCrop, "row band outside the log-polar grid");
  }
  const int n = spec.size();
  const double c0 = n / 2.0;
  const int na = grid.n_alpha;

  std::vector<double> cosv(na), sinv(na);
  for (int j = 0; j < na; ++j) {
    const double a = deg_to_rad(j * grid.alpha_step());
    cosv[j] = std::cos(a);
    sinv[j] = std::sin(a);
  }

  LogPolarSpectrum out;
  out.grid = grid;
  out.crop_offset = first_row;
  out.rows = row_count;
  out.data.assign(static_cast<std::size_t>(row_count) * na, ComplexF{});
  auto fetch = [&](int x, int y) -> fft::Complex {
    return (x >= 0 && y >= 0 && x < n && y < n) ? spec.at(x, y) : fft::Complex{};
  };
  for (int i = 0; i < row_count; ++i) {
    const double r = grid.radius(first_row + i);
    ComplexF* dst = out.data.data() + static_cast<std::size_t>(i) * na;
    for (int j = 0; j < na; ++j) {
      const double x = c0 + r * cosv[j];
      const double y = c0 + r * sinv[j];
      const double fx = std::floor(x);
      const double fy = std::floor(y);
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const double ax = x - fx;
      const double ay = y - fy;
      const fft::Complex v = (1.0 - ay) * ((1.0 - ax) * fetch(x0, y0) + ax * fetch(x0 + 1, y0)) +
                             ay * ((1.0 - ax) * fetch(x0, y0 + 1) + ax * fetch(x0 + 1, y0 + 1));
      dst[j] = ComplexF(static_cast<float>(v.real()), static_cast<float>(v.imag()));
    }
  }
  return out;
}

LogPolarSpectrum classic_fm(const GrayImage& img, int fft_size, const LogPolarGrid& grid) {
  Spectrum spec = fft2_padded(img, fft_size, Anchor::kTopLeft);
  for (auto& v : spec.bins()) v = std::abs(v);
  return log_polar_map(spec, grid);
}

int crop_window_offset(const LogPolarGrid& grid, int delta_rho, int crop_center) {
  if (delta_rho < 1 || delta_rho > grid.n_rho) {
    throw Error(ErrorCode::kBadCrop, "delta_rho " + std::to_string(delta_rho) + " outside [1, " +
                                         std::to_string(grid.n_rho) + "]");
  }
  if (crop_center < 0 || crop_center >= grid.n_rho) {
    throw Error(ErrorCode::kBadCrop, "crop center " + std::to_string(crop_center) + " outside the grid");
  }
  return std::clamp(crop_center - delta_rho / 2, 0, grid.n_rho - delta_rho);
}

LogPolarSpectrum mfm(const Spectrum& centered_spectrum, const LogPolarGrid& grid, int delta_rho,
                     int crop_center) {
  const int offset = crop_window_offset(grid, delta_rho, crop_center);
  return log_polar_map(centered_spectrum, grid, offset, delta_rho);
}

LogPolarSpectrum mfm(const GrayImage& img, int fft_size, const LogPolarGrid& grid, int delta_rho,
                     int crop_center) {
  // Validate the crop before paying for the transform.
  crop_window_offset(grid, delta_rho, crop_center);
  return mfm(fft2_padded(img, fft_size, Anchor::kCentered), grid, delta_rho, crop_center);
}

int crop_center_from_fingerprint(const LogPolarSpectrum& fp_lp) {
  int best = 0;
  double best_energy = -1.0;
  for (int i = 0; i < fp_lp.rows; ++i) {
    double e = 0.0;
    for (const ComplexF& v : fp_lp.row(i)) e += std::norm(std::complex<double>(v));
    if (e > best_energy) {
      best_energy = e;
      best = i;
    }
  }
  return fp_lp.crop_offset + best;
}

namespace {

// Forward 2D FFT of a rows x cols band zero-padded to padded x cols, done as
// row transforms on the populated rows followed by column transforms.
void forward_padded(fft::AlignedVector<ComplexF>& buf, int rows, int padded, int cols) {
  fft::transform_rows(std::span(buf.data(), static_cast<std::size_t>(rows) * cols), rows, cols,
                      fft::Direction::kForward);
  fft::transform_columns(buf, padded, cols, cols, fft::Direction::kForward);
}

double parabolic_offset(double left, double mid, double right) noexcept {
  const double denom = left - 2.0 * mid + right;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

int wrap(int i, int n) noexcept {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace

LogPolarCorrelator::LogPolarCorrelator(const LogPolarSpectrum& reference,
                                       std::optional<SearchRanges> ranges)
    : grid_(reference.grid), crop_offset_(reference.crop_offset), rows_(reference.rows) {
  grid_.validate();
  if (rows_ < 2 || reference.data.size() != static_cast<std::size_t>(rows_) * grid_.n_alpha) {
    throw Error(ErrorCode::kInvalidArgument, "log-polar reference band is malformed");
  }
  const double drho = grid_.rho_step();
  const double dalpha = grid_.alpha_step();
  int margin = 0;
  if (ranges) {
    ranges->validate();
    // query ~ reference shifted by (-log s / drho, angle / dalpha).
    LagWindow w{};
    w.rho_lo = static_cast<int>(std::floor(-std::log(ranges->scale.hi) / drho));
    w.rho_hi = static_cast<int>(std::ceil(-std::log(ranges->scale.lo) / drho));
    w.alpha_lo = static_cast<int>(std::floor(ranges->angle.lo / dalpha));
    w.alpha_hi = static_cast<int>(std::ceil(ranges->angle.hi / dalpha));
    if (w.alpha_hi - w.alpha_lo + 3 >= grid_.n_alpha) {
      throw Error(ErrorCode::kInvalidConfig, "angle range wider than the log-polar grid");
    }
    margin = std::max(std::abs(w.rho_lo), std::abs(w.rho_hi)) + 1;
    window_ = w;
  }
  padded_rows_ = fft::next_smooth_size(rows_ + margin);
  if (window_ && window_->rho_hi - window_->rho_lo + 3 > padded_rows_) {
    throw Error(ErrorCode::kInvalidConfig, "scale range wider than the cropped band");
  }

  const int na = grid_.n_alpha;
  reference_conj_.assign(static_cast<std::size_t>(padded_rows_) * na, ComplexF{});
  std::copy(reference.data.begin(), reference.data.end(), reference_conj_.begin());
  forward_padded(reference_conj_, rows_, padded_rows_, na);
  bool any = false;
  for (auto& v : reference_conj_) {
    any = any || v != ComplexF{};
    v = std::conj(v);
  }
  if (!any) throw Error(ErrorCode::kDegenerateInput, "log-polar reference is all zero");
}

ScaleRotation LogPolarCorrelator::estimate(const LogPolarSpectrum& query) const {
  if (!(query.grid == grid_) || query.crop_offset != crop_offset_ || query.rows != rows_) {
    throw Error(ErrorCode::kInvalidArgument, "log-polar bands differ in grid or crop");
  }
  return estimate(std::span<const ComplexF>(query.data));
}

ScaleRotation LogPolarCorrelator::estimate(std::span<const ComplexF> query) const {
  const int na = grid_.n_alpha;
  if (query.size() != static_cast<std::size_t>(rows_) * na) {
    throw Error(ErrorCode::kInvalidArgument, "query band size does not match the reference");
  }
  thread_local fft::AlignedVector<ComplexF> buf;
  buf.assign(static_cast<std::size_t>(padded_rows_) * na, ComplexF{});
  std::copy(query.begin(), query.end(), buf.begin());
  return estimate_in_place(buf);
}

ScaleRotation LogPolarCorrelator::estimate_in_place(fft::AlignedVector<ComplexF>& buf) const {
  const int na = grid_.n_alpha;
  const int pr = padded_rows_;
  if (buf.size() != static_cast<std::size_t>(pr) * na) {
    throw Error(ErrorCode::kInvalidArgument, "work buffer size does not match the padded band");
  }
  forward_padded(buf, rows_, pr, na);

  float max_norm = 0.0f;
  const std::size_t total = buf.size();
  for (std::size_t i = 0; i < total; ++i) {
    const ComplexF v = mul(buf[i], reference_conj_[i]);
    buf[i] = v;
    max_norm = std::max(max_norm, v.real() * v.real() + v.imag() * v.imag());
  }
  if (!(max_norm > 0.0f)) throw Error(ErrorCode::kDegenerateInput, "log-polar query is all zero");
  const float eps = 1e-12f * std::sqrt(max_norm);
  for (std::size_t i = 0; i < total; ++i) {
    const ComplexF v = buf[i];
    const float inv = 1.0f / (std::sqrt(v.real() * v.real() + v.imag() * v.imag()) + eps);
    buf[i] = {v.real() * inv, v.imag() * inv};
  }

  int rho_lo = -(pr / 2) + 1, rho_hi = pr / 2;
  int alpha_lo = -(na / 2) + 1, alpha_hi = na / 2;
  if (window_) {
    rho_lo = window_->rho_lo;
    rho_hi = window_->rho_hi;
    alpha_lo = window_->alpha_lo;
    alpha_hi = window_->alpha_hi;
    // Inverse along alpha for every row, then along rho only for the
    // columns holding candidate lags (plus one either side for the fit).
    fft::transform_rows(buf, pr, na, fft::Direction::kInverse);
    const int first = alpha_lo - 1;
    const int count = alpha_hi - alpha_lo + 3;
    const int start = wrap(first, na);
    if (start + count <= na) {
      fft::transform_columns(std::span(buf.data() + start, buf.size() - start), pr, count, na,
                             fft::Direction::kInverse);
    } else {
      const int head = na - start;
      fft::transform_columns(std::span(buf.data() + start, buf.size() - start), pr, head, na,
                             fft::Direction::kInverse);
      fft::transform_columns(buf, pr, count - head, na, fft::Direction::kInverse);
    }
  } else {
    fft::transform_2d(buf, pr, na, fft::Direction::kInverse);
  }
  const double norm = 1.0 / (static_cast<double>(pr) * na);
  auto value = [&](int rho_lag, int alpha_lag) -> double {
    return buf[static_cast<std::size_t>(wrap(rho_lag, pr)) * na + wrap(alpha_lag, na)].real() * norm;
  };
  int best_r = rho_lo, best_a = alpha_lo;
  double best = -1e300;
  for (int r = rho_lo; r <= rho_hi; ++r) {
    for (int a = alpha_lo; a <= alpha_hi; ++a) {
      const double v = value(r, a);
      if (v > best) {
        best = v;
        best_r = r;
        best_a = a;
      }
    }
  }
  ScaleRotation out;
  out.peak = best;
  out.rho_lag = best_r + parabolic_offset(value(best_r - 1, best_a), best, value(best_r + 1, best_a));
  out.alpha_lag = best_a + parabolic_offset(value(best_r, best_a - 1), best, value(best_r, best_a + 1));
  out.scale = std::exp(-out.rho_lag * grid_.rho_step());
  double angle = out.alpha_lag * grid_.alpha_step();
  if (angle <= -90.0) angle += 180.0;
  if (angle > 90.0) angle -= 180.0;
  out.angle = angle;
  return out;
}

ScaleRotation estimate_scale_rotation(const LogPolarSpectrum& query, const LogPolarSpectrum& reference,
                                      std::optional<SearchRanges> ranges) {
  if (!(query.grid == reference.grid) || query.crop_offset != reference.crop_offset ||
      query.rows != reference.rows) {
    throw Error(ErrorCode::kInvalidArgument, "log-polar bands differ in grid or crop");
  }
  return LogPolarCorrelator(reference, ranges).estimate(query);
}

}  // namespace prnufm
