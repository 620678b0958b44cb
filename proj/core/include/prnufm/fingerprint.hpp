#pragma once

#include <span>
#include <string>

#include "prnufm/image.hpp"
#include "prnufm/noise.hpp"

namespace prnufm {

struct Fingerprint {
  GrayImage raster;  // PRNU estimate K
  int n_images = 0;
  std::string device_id;
};

struct FingerprintOptions {
  NoiseConfig noise;
  int threads = 1;  // residual extraction fan-out
};

// Maximum-likelihood estimate of the multiplicative PRNU from flat-field
// images: K = sum_i W_i I_i / sum_i I_i^2, with W_i = extract(I_i), then
// post-processed. Pixels whose denominator falls below 1e-6 get K = 0.
// Throws kTooFewImages for an empty list, kDimensionMismatch for unequal
// shapes and kTooSmall (from denoise) below 64x64.
Fingerprint estimate(std::span<const GrayImage> flats, const FingerprintOptions& opts = {},
                     std::string device_id = {});

// K * I elementwise: the reference a frame I is expected to carry.
GrayImage scale_by_frame(const Fingerprint& fp, const GrayImage& frame);
GrayImage scale_by_frame(const GrayImage& k, const GrayImage& frame);

}  // namespace prnufm
