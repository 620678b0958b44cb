#pragma once

#include <array>
#include <vector>

#include "prnufm/image.hpp"

namespace prnufm::wavelet {

// 8-tap Daubechies (four vanishing moments) analysis/synthesis filters.
struct FilterBank {
  std::array<double, 8> lo_d;
  std::array<double, 8> hi_d;
  std::array<double, 8> lo_r;
  std::array<double, 8> hi_r;
};
const FilterBank& daubechies8();

// Single-level 1D analysis with half-sample symmetric extension. Output
// length is (n + 7) / 2 for both bands.
void analyze(const std::vector<double>& x, std::vector<double>& approx, std::vector<double>& detail);

// Inverse of analyze(); `n` is the original signal length.
std::vector<double> synthesize(const std::vector<double>& approx, const std::vector<double>& detail,
                               int n);

// Row-major band; width x height coefficients.
struct Band {
  int width = 0;
  int height = 0;
  std::vector<double> c;
  double& at(int x, int y) { return c[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return c[static_cast<std::size_t>(y) * width + x]; }
};

struct Level {
  Band lh;  // horizontal detail
  Band hl;  // vertical detail
  Band hh;  // diagonal detail
  int width = 0;   // size of the approximation this level was computed from
  int height = 0;
};

struct Decomposition {
  Band approx;
  std::vector<Level> levels;  // finest first
};

Decomposition decompose(const GrayImage& img, int levels);
GrayImage reconstruct(const Decomposition& dec);

}  // namespace prnufm::wavelet
