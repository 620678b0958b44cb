#include "prnufm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prnufm/error.hpp"
#include "prnufm/fft.hpp"
#include "prnufm/wavelet.hpp"

namespace prnufm {

namespace {

// Local mean of c^2 over a (2r+1)^2 window, truncated at the band edges,
// via a summed-area table.
class SquareWindowMeans {
 public:
  explicit SquareWindowMeans(const wavelet::Band& b) : w_(b.width), h_(b.height) {
    sat_.assign(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0.0);
    for (int y = 0; y < h_; ++y) {
      double rowsum = 0.0;
      for (int x = 0; x < w_; ++x) {
        const double v = b.at(x, y);
        rowsum += v * v;
        sat(x + 1, y + 1) = sat(x + 1, y) + rowsum;
      }
    }
  }

  double mean(int x, int y, int r) const {
    const int x0 = std::max(0, x - r), x1 = std::min(w_, x + r + 1);
    const int y0 = std::max(0, y - r), y1 = std::min(h_, y + r + 1);
    const double s = sat(x1, y1) - sat(x0, y1) - sat(x1, y0) + sat(x0, y0);
    return s / static_cast<double>((x1 - x0) * (y1 - y0));
  }

 private:
  double& sat(int x, int y) { return sat_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double sat(int x, int y) const { return sat_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  int w_, h_;
  std::vector<double> sat_;
};

void shrink(wavelet::Band& b, double sigma0) {
  const double s2 = sigma0 * sigma0;
  const SquareWindowMeans means(b);
  for (int y = 0; y < b.height; ++y) {
    for (int x = 0; x < b.width; ++x) {
      double var = std::max(0.0, means.mean(x, y, 1) - s2);
      for (int r = 2; r <= 4; ++r) var = std::min(var, std::max(0.0, means.mean(x, y, r) - s2));
      b.at(x, y) *= var / (var + s2);
    }
  }
}

bool is_constant(const GrayImage& img) {
  const auto px = img.pixels();
  return std::all_of(px.begin(), px.end(), [&](double v) { return v == px[0]; });
}

}  // namespace

GrayImage denoise(const GrayImage& img, const NoiseConfig& cfg) {
  if (img.width() < cfg.min_dimension || img.height() < cfg.min_dimension) {
    throw Error(ErrorCode::kTooSmall, "denoise needs at least " + std::to_string(cfg.min_dimension) +
                                          "x" + std::to_string(cfg.min_dimension) + ", got " +
                                          std::to_string(img.width()) + "x" +
                                          std::to_string(img.height()));
  }
  if (!(cfg.sigma0 > 0.0) || cfg.levels < 1) {
    throw Error(ErrorCode::kInvalidConfig, "denoise needs sigma0 > 0 and levels >= 1");
  }
  // No detail to shrink; also keeps the residual of flat input exactly zero.
  if (is_constant(img)) return img;

  wavelet::Decomposition dec = wavelet::decompose(img, cfg.levels);
  for (auto& lv : dec.levels) {
    shrink(lv.lh, cfg.sigma0);
    shrink(lv.hl, cfg.sigma0);
    shrink(lv.hh, cfg.sigma0);
  }
  return wavelet::reconstruct(dec);
}

void zero_mean_rows_cols(GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  for (int y = 0; y < h; ++y) {
    auto row = img.row(y);
    double m = 0.0;
    for (double v : row) m += v;
    m /= w;
    for (double& v : row) v -= m;
  }
  std::vector<double> colmean(w, 0.0);
  for (int y = 0; y < h; ++y) {
    const auto row = img.row(y);
    for (int x = 0; x < w; ++x) colmean[x] += row[x];
  }
  for (double& m : colmean) m /= h;
  for (int y = 0; y < h; ++y) {
    auto row = img.row(y);
    for (int x = 0; x < w; ++x) row[x] -= colmean[x];
  }
}

GrayImage wiener_dft(const GrayImage& img) {
  using fft::Complex;
  const int rows = img.height();
  const int cols = img.width();
  const int hc = cols / 2 + 1;
  fft::AlignedVector<double> in(img.pixels().begin(), img.pixels().end());
  fft::AlignedVector<Complex> spec(static_cast<std::size_t>(rows) * hc);
  fft::forward_real_2d(in, spec, rows, cols);

  std::vector<double> power(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) power[i] = std::norm(spec[i]);
  std::vector<double> sorted = power;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const double noise_power = *mid;

  // 3x3 local power: circular along the full-length axis, truncated along
  // the half-spectrum axis.
  for (int ky = 0; ky < rows; ++ky) {
    for (int kx = 0; kx < hc; ++kx) {
      double acc = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = (ky + dy + rows) % rows;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = kx + dx;
          if (xx < 0 || xx >= hc) continue;
          acc += power[static_cast<std::size_t>(yy) * hc + xx];
          ++count;
        }
      }
      const double local = acc / count;
      const double gain = local > noise_power ? noise_power / local : 1.0;
      spec[static_cast<std::size_t>(ky) * hc + kx] *= gain;
    }
  }
  fft::AlignedVector<double> out(in.size());
  fft::inverse_real_2d(spec, out, rows, cols);
  const double norm = 1.0 / (static_cast<double>(rows) * cols);
  std::vector<double> data(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) data[i] = out[i] * norm;
  return GrayImage(cols, rows, std::move(data));
}

NoiseResidual postprocess(const GrayImage& residual) {
  require_finite(residual.pixels(), "residual samples");
  GrayImage w = residual;
  zero_mean_rows_cols(w);
  if (energy(w) > 0.0) {
    w = wiener_dft(w);
    // The Wiener gain never touches the zeroed DC row/column; this pass only
    // removes rounding residue.
    zero_mean_rows_cols(w);
  }
  return NoiseResidual{std::move(w), residual.width(), residual.height()};
}

NoiseResidual extract(const GrayImage& img, const NoiseConfig& cfg) {
  const GrayImage smooth = denoise(img, cfg);
  std::vector<double> diff(img.size());
  const auto a = img.pixels();
  const auto b = smooth.pixels();
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
  return postprocess(GrayImage(img.width(), img.height(), std::move(diff)));
}

}  // namespace prnufm
