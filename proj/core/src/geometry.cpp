#include "prnufm/geometry.hpp"

#include <cmath>

#include "prnufm/error.hpp"

namespace prnufm {

double normalize_angle_deg(double degrees) noexcept {
  double a = std::fmod(degrees, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

SimilarityParams SimilarityParams::normalized() const {
  if (!std::isfinite(scale) || !std::isfinite(angle) || !std::isfinite(shift_x) ||
      !std::isfinite(shift_y)) {
    throw Error(ErrorCode::kInvalidArgument, "similarity parameters must be finite");
  }
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "similarity scale must be > 0");
  SimilarityParams out = *this;
  out.angle = normalize_angle_deg(angle);
  return out;
}

void SearchRanges::validate() const {
  auto check = [](const Interval& iv, const char* name) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
      throw Error(ErrorCode::kInvalidConfig, std::string(name) + " range must satisfy lo <= hi");
    }
  };
  check(scale, "scale");
  check(angle, "angle");
  check(shift, "shift");
  if (!(scale.lo > 0.0)) throw Error(ErrorCode::kInvalidConfig, "scale range must be positive");
}

namespace {

// Exact trigonometry at multiples of 90 degrees so axis-aligned matrices
// carry no rounding residue.
void sincos_deg(double degrees, double& s, double& c) {
  const double a = normalize_angle_deg(degrees);
  if (a == 0.0) { s = 0.0; c = 1.0; return; }
  if (a == 90.0) { s = 1.0; c = 0.0; return; }
  if (a == 180.0) { s = 0.0; c = -1.0; return; }
  if (a == -90.0) { s = -1.0; c = 0.0; return; }
  const double r = deg_to_rad(a);
  s = std::sin(r);
  c = std::cos(r);
}

}  // namespace

Matrix2x3 to_matrix(const SimilarityParams& p) {
  double s = 0.0, c = 0.0;
  sincos_deg(p.angle, s, c);
  return {{{p.scale * c, -p.scale * s, p.shift_x}, {p.scale * s, p.scale * c, p.shift_y}}};
}

Matrix2x3 compose(const Matrix2x3& a, const Matrix2x3& b) noexcept {
  Matrix2x3 out{};
  for (int r = 0; r < 2; ++r) {
    out[r][0] = a[r][0] * b[0][0] + a[r][1] * b[1][0];
    out[r][1] = a[r][0] * b[0][1] + a[r][1] * b[1][1];
    out[r][2] = a[r][0] * b[0][2] + a[r][1] * b[1][2] + a[r][2];
  }
  return out;
}

SimilarityParams invert(const SimilarityParams& p) {
  const SimilarityParams q = p.normalized();
  double s = 0.0, c = 0.0;
  sincos_deg(-q.angle, s, c);
  const double inv_scale = 1.0 / q.scale;
  // x = A^{-1}(x' - t)  =>  inverse translation is -A^{-1} t.
  const double tx = -inv_scale * (c * q.shift_x - s * q.shift_y);
  const double ty = -inv_scale * (s * q.shift_x + c * q.shift_y);
  return SimilarityParams{inv_scale, normalize_angle_deg(-q.angle), tx, ty};
}

Pivot pivot_of(int width, int height) noexcept { return Pivot{width / 2, height / 2}; }

GrayImage warp(const GrayImage& img, const SimilarityParams& p, int out_width, int out_height) {
  const SimilarityParams q = p.normalized();
  GrayImage out(out_width, out_height);
  const SimilarityParams inv = invert(q);
  const Matrix2x3 m = to_matrix(inv);
  const Pivot pin = pivot_of(img.width(), img.height());
  const Pivot pout = pivot_of(out_width, out_height);
  const int w = img.width();
  const int h = img.height();

  for (int y = 0; y < out_height; ++y) {
    const double oy = static_cast<double>(y - pout.y);
    double* dst = out.row(y).data();
    for (int x = 0; x < out_width; ++x) {
      const double ox = static_cast<double>(x - pout.x);
      const double sx = m[0][0] * ox + m[0][1] * oy + m[0][2] + pin.x;
      const double sy = m[1][0] * ox + m[1][1] * oy + m[1][2] + pin.y;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) continue;
      const double ax = sx - fx;
      const double ay = sy - fy;
      auto sample = [&](int xi, int yi) -> double {
        return (xi >= 0 && yi >= 0 && xi < w && yi < h) ? img.at(xi, yi) : 0.0;
      };
      // Integer source positions copy through untouched.
      if (ax == 0.0 && ay == 0.0) {
        dst[x] = sample(x0, y0);
        continue;
      }
      const double top = (1.0 - ax) * sample(x0, y0) + ax * sample(x0 + 1, y0);
      const double bottom = (1.0 - ax) * sample(x0, y0 + 1) + ax * sample(x0 + 1, y0 + 1);
      dst[x] = (1.0 - ay) * top + ay * bottom;
    }
  }
  return out;
}

GrayImage translate(const GrayImage& img, int dx, int dy) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    const int sy = y - dy;
    if (sy < 0 || sy >= img.height()) continue;
    for (int x = 0; x < img.width(); ++x) {
      const int sx = x - dx;
      if (sx < 0 || sx >= img.width()) continue;
      out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

}  // namespace prnufm
