#include "prnufm/wavelet.hpp"

#include "prnufm/error.hpp"

namespace prnufm::wavelet {

namespace {

constexpr int kTaps = 8;

// Half-sample symmetric index: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) x(n-2) ...
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

Band band(int w, int h) { return Band{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)}; }

}  // namespace

const FilterBank& daubechies8() {
  static const FilterBank bank = [] {
    const std::array<double, kTaps> lo_r = {
        0.23037781330885523,  0.71484657055254153,  0.63088076792959036, -0.027983769416983849,
        -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278};
    FilterBank b{};
    b.lo_r = lo_r;
    for (int k = 0; k < kTaps; ++k) {
      b.lo_d[k] = lo_r[kTaps - 1 - k];
      b.hi_r[k] = ((k % 2) ? -1.0 : 1.0) * lo_r[kTaps - 1 - k];
    }
    for (int k = 0; k < kTaps; ++k) b.hi_d[k] = b.hi_r[kTaps - 1 - k];
    return b;
  }();
  return bank;
}

void analyze(const std::vector<double>& x, std::vector<double>& approx, std::vector<double>& detail) {
  const auto& f = daubechies8();
  const int n = static_cast<int>(x.size());
  const int out = (n + kTaps - 1) / 2;
  approx.assign(out, 0.0);
  detail.assign(out, 0.0);
  // Valid convolution of the (kTaps-1)-extended signal, keeping odd samples.
  for (int m = 0; m < out; ++m) {
    const int k = 2 * m + 1;
    double a = 0.0, d = 0.0;
    for (int j = 0; j < kTaps; ++j) {
      const double v = x[reflect(k - j, n)];
      a += f.lo_d[j] * v;
      d += f.hi_d[j] * v;
    }
    approx[m] = a;
    detail[m] = d;
  }
}

std::vector<double> synthesize(const std::vector<double>& approx, const std::vector<double>& detail,
                               int n) {
  const auto& f = daubechies8();
  const int la = static_cast<int>(approx.size());
  // Full convolution of the zero-upsampled bands has length 2*la - 1 + kTaps - 1;
  // the central n samples reproduce the signal.
  const int full = 2 * la + kTaps - 2;
  const int first = (full - n) / 2;
  std::vector<double> y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int t = i + first;
    double acc = 0.0;
    for (int j = 0; j < kTaps; ++j) {
      const int u = t - j;
      if (u < 0 || (u & 1) || u / 2 >= la) continue;
      acc += f.lo_r[j] * approx[u / 2] + f.hi_r[j] * detail[u / 2];
    }
    y[i] = acc;
  }
  return y;
}

Decomposition decompose(const GrayImage& img, int levels) {
  Decomposition dec;
  Band cur = band(img.width(), img.height());
  cur.c.assign(img.pixels().begin(), img.pixels().end());
  std::vector<double> line, a, d;
  for (int lvl = 0; lvl < levels; ++lvl) {
    const int w = cur.width;
    const int h = cur.height;
    const int wo = (w + kTaps - 1) / 2;
    const int ho = (h + kTaps - 1) / 2;
    // Rows: L and H halves, each h x wo.
    Band rl = band(wo, h), rh = band(wo, h);
    line.resize(w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) line[x] = cur.at(x, y);
      analyze(line, a, d);
      for (int x = 0; x < wo; ++x) {
        rl.at(x, y) = a[x];
        rh.at(x, y) = d[x];
      }
    }
    Level level;
    level.width = w;
    level.height = h;
    Band ll = band(wo, ho);
    level.lh = band(wo, ho);
    level.hl = band(wo, ho);
    level.hh = band(wo, ho);
    line.resize(h);
    for (int x = 0; x < wo; ++x) {
      for (int y = 0; y < h; ++y) line[y] = rl.at(x, y);
      analyze(line, a, d);
      for (int y = 0; y < ho; ++y) {
        ll.at(x, y) = a[y];
        level.lh.at(x, y) = d[y];
      }
      for (int y = 0; y < h; ++y) line[y] = rh.at(x, y);
      analyze(line, a, d);
      for (int y = 0; y < ho; ++y) {
        level.hl.at(x, y) = a[y];
        level.hh.at(x, y) = d[y];
      }
    }
    dec.levels.push_back(std::move(level));
    cur = std::move(ll);
  }
  dec.approx = std::move(cur);
  return dec;
}

GrayImage reconstruct(const Decomposition& dec) {
  Band cur = dec.approx;
  std::vector<double> a, d;
  for (auto it = dec.levels.rbegin(); it != dec.levels.rend(); ++it) {
    const Level& lv = *it;
    const int wo = lv.lh.width;
    const int ho = lv.lh.height;
    if (cur.width != wo || cur.height != ho) {
      throw Error(ErrorCode::kInvalidArgument, "wavelet band shapes are inconsistent");
    }
    Band rl = band(wo, lv.height), rh = band(wo, lv.height);
    a.resize(ho);
    d.resize(ho);
    for (int x = 0; x < wo; ++x) {
      for (int y = 0; y < ho; ++y) {
        a[y] = cur.at(x, y);
        d[y] = lv.lh.at(x, y);
      }
      auto col = synthesize(a, d, lv.height);
      for (int y = 0; y < lv.height; ++y) rl.at(x, y) = col[y];
      for (int y = 0; y < ho; ++y) {
        a[y] = lv.hl.at(x, y);
        d[y] = lv.hh.at(x, y);
      }
      col = synthesize(a, d, lv.height);
      for (int y = 0; y < lv.height; ++y) rh.at(x, y) = col[y];
    }
    Band next = band(lv.width, lv.height);
    a.resize(wo);
    d.resize(wo);
    for (int y = 0; y < lv.height; ++y) {
      for (int x = 0; x < wo; ++x) {
        a[x] = rl.at(x, y);
        d[x] = rh.at(x, y);
      }
      const auto row = synthesize(a, d, lv.width);
      for (int x = 0; x < lv.width; ++x) next.at(x, y) = row[x];
    }
    cur = std::move(next);
  }
  return GrayImage(cur.width, cur.height, std::move(cur.c));
}

}  // namespace prnufm::wavelet
