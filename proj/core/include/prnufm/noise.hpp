#pragma once

#include "prnufm/image.hpp"

namespace prnufm {

struct NoiseConfig {
  int levels = 4;            // wavelet decomposition depth
  double sigma0 = 5.0;       // noise floor on a 0-255 intensity scale
  int min_dimension = 64;    // smallest frame side the decomposition accepts
};

// Signed noise residual W with zero row and column means.
struct NoiseResidual {
  GrayImage raster;
  int source_width = 0;
  int source_height = 0;
};

// Wavelet-domain Wiener denoiser F(I). Detail coefficients are shrunk by
// sigma_hat^2 / (sigma_hat^2 + sigma0^2), where sigma_hat^2 is the minimum
// over 3/5/7/9 square windows of the local variance estimate. The
// approximation band passes through untouched. Throws kTooSmall if either
// dimension is below cfg.min_dimension.
GrayImage denoise(const GrayImage& img, const NoiseConfig& cfg = {});

// Row means, then column means removed; then a spectral Wiener step that
// attenuates bins whose local power exceeds the median spectral power.
NoiseResidual postprocess(const GrayImage& residual);

// postprocess(img - denoise(img)).
NoiseResidual extract(const GrayImage& img, const NoiseConfig& cfg = {});

// Subtract row means, then column means, in place.
void zero_mean_rows_cols(GrayImage& img);

// The spectral Wiener step alone.
GrayImage wiener_dft(const GrayImage& img);

}  // namespace prnufm
