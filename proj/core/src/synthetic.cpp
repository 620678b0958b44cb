#include "prnufm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "prnufm/error.hpp"

namespace prnufm::synthetic {

GrayImage prnu_pattern(int width, int height, double strength, std::uint64_t seed) {
  if (!(strength > 0.0)) throw Error(ErrorCode::kInvalidArgument, "PRNU strength must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GrayImage white(width, height);
  for (double& v : white.pixels()) v = gauss(rng);

  GrayImage k(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
          sum += white.at(xx, yy);
          ++count;
        }
      }
      k.at(x, y) = white.at(x, y) - sum / count;
    }
  }
  const double mu = mean(k);
  double ss = 0.0;
  for (double& v : k.pixels()) {
    v -= mu;
    ss += v * v;
  }
  const double scale = strength / std::sqrt(ss / static_cast<double>(k.size()));
  for (double& v : k.pixels()) v *= scale;
  return k;
}

GrayImage scene(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Grating {
    double fx, fy, phase, amp;
  };
  std::vector<Grating> gratings(8);
  for (Grating& g : gratings) {
    const double cycles = 0.5 + 7.5 * unit(rng);  // across the frame
    const double dir = 2.0 * std::numbers::pi * unit(rng);
    g.fx = cycles * std::cos(dir) / width;
    g.fy = cycles * std::sin(dir) / height;
    g.phase = 2.0 * std::numbers::pi * unit(rng);
    g.amp = 6.0 + 14.0 * unit(rng);
  }
  const double gx = 30.0 * (unit(rng) - 0.5);
  const double gy = 30.0 * (unit(rng) - 0.5);

  GrayImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = 125.0 + gx * (x / static_cast<double>(width) - 0.5) + gy * (y / static_cast<double>(height) - 0.5);
      for (const Grating& g : gratings) {
        v += g.amp * std::sin(2.0 * std::numbers::pi * (g.fx * x + g.fy * y) + g.phase);
      }
      img.at(x, y) = std::clamp(v, 40.0, 210.0);
    }
  }
  return img;
}

GrayImage flat_scene(int width, int height, double level) { return GrayImage(width, height, level); }

GrayImage render(const GrayImage& scene_img, const GrayImage& prnu, const DeviceModel& model, std::uint64_t seed) {
  require_same_shape(scene_img, prnu, "render");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, model.read_noise > 0.0 ? model.read_noise : 1.0);
  GrayImage out(scene_img.width(), scene_img.height());
  const auto s = scene_img.pixels();
  const auto k = prnu.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) {
    double v = s[i] * (1.0 + k[i]);
    if (model.read_noise > 0.0) v += gauss(rng);
    o[i] = model.quantize ? std::round(v) : v;
  }
  return out;
}

SimilarityParams random_similarity(const SearchRanges& ranges, std::mt19937_64& rng) {
  ranges.validate();
  std::uniform_real_distribution<double> scale(ranges.scale.lo, ranges.scale.hi);
  std::uniform_real_distribution<double> angle(ranges.angle.lo, ranges.angle.hi);
  std::uniform_int_distribution<int> shift(static_cast<int>(std::ceil(ranges.shift.lo)),
                                           static_cast<int>(std::floor(ranges.shift.hi)));
  SimilarityParams p;
  p.scale = scale(rng);
  p.angle = angle(rng);
  p.shift_x = shift(rng);
  p.shift_y = shift(rng);
  return p;
}

}  // namespace prnufm::synthetic
