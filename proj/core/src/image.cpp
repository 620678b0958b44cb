#include "prnufm/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prnufm/error.hpp"

namespace prnufm {

namespace {

void require_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height) : GrayImage(width, height, 0.0) {}

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  require_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
  if (!std::isfinite(fill)) throw Error(ErrorCode::kDegenerateInput, "non-finite fill value");
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  require_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample count " + std::to_string(data_.size()) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  require_finite(data_, "image samples");
}

void require_same_shape(const GrayImage& a, const GrayImage& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

void require_finite(std::span<const double> samples, const char* what) {
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kDegenerateInput, std::string(what) + " contain NaN/Inf");
  }
}

double mean(const GrayImage& img) noexcept {
  if (img.empty()) return 0.0;
  double acc = 0.0;
  for (double v : img.pixels()) acc += v;
  return acc / static_cast<double>(img.size());
}

double energy(const GrayImage& img) noexcept {
  double acc = 0.0;
  for (double v : img.pixels()) acc += v * v;
  return acc;
}

double correlation(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a, b, "correlation");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double da = pa[i] - ma;
    const double db = pb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

GrayImage center_crop(const GrayImage& img, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "crop fraction must lie in (0, 1]");
  }
  const int w = std::max(1, static_cast<int>(std::lround(img.width() * fraction)));
  const int h = std::max(1, static_cast<int>(std::lround(img.height() * fraction)));
  return crop(img, (img.width() - w) / 2, (img.height() - h) / 2, w, h);
}

GrayImage crop(const GrayImage& img, int x0, int y0, int width, int height) {
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = y + y0;
    if (sy < 0 || sy >= img.height()) continue;
    for (int x = 0; x < width; ++x) {
      const int sx = x + x0;
      if (sx < 0 || sx >= img.width()) continue;
      out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

}  // namespace prnufm
