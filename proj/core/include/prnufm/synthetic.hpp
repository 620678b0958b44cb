#pragma once

#include <cstdint>
#include <random>

#include "prnufm/geometry.hpp"
#include "prnufm/image.hpp"

// Seeded scene, sensor and warp generators for tests and the bench.
namespace prnufm::synthetic {

struct DeviceModel {
  double prnu_strength = 0.02;  // std of the multiplicative gain pattern
  double read_noise = 1.5;      // additive noise std, 0-255 scale
  bool quantize = true;         // round rendered frames to integers
};

// Zero-mean multiplicative gain pattern: white Gaussian minus its 3x3
// local mean, rescaled to std `strength`. The subtraction leaves the
// pattern high-pass, as an estimated sensor fingerprint is.
GrayImage prnu_pattern(int width, int height, double strength, std::uint64_t seed);

// Smooth textured content in roughly [40, 210]: a few random low-frequency
// gratings over a gradient.
GrayImage scene(int width, int height, std::uint64_t seed);

GrayImage flat_scene(int width, int height, double level);

// scene * (1 + prnu) + read noise.
GrayImage render(const GrayImage& scene, const GrayImage& prnu, const DeviceModel& model, std::uint64_t seed);

// Scale, angle uniform in their ranges; integer shifts uniform in the shift range.
SimilarityParams random_similarity(const SearchRanges& ranges, std::mt19937_64& rng);

}  // namespace prnufm::synthetic
