#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "prnufm/image.hpp"

namespace prnufm {

// Reads 8/16-bit PGM (P2/P5), PPM (P3/P6) and PNG. Colour inputs are
// reduced to luminance with ITU-R BT.601 weights. Samples keep their
// native integer scale (0-255 or 0-65535).
GrayImage read_image(const std::filesystem::path& path);

// 16-bit binary PGM when max_value > 255, else 8-bit. Samples are rounded
// and clamped to [0, max_value].
void write_pgm(const std::filesystem::path& path, const GrayImage& img, int max_value = 255);

// 8-bit grayscale PNG with a linear min/max stretch; for inspection dumps.
void write_png_preview(const std::filesystem::path& path, const GrayImage& img);

double luminance_bt601(double r, double g, double b) noexcept;

// Raw little-endian float32 raster plus a JSON sidecar at `<path>.json`:
//   {"width": W, "height": H, "kind": "...", "dtype": "float32",
//    "byte_order": "little", ["device_id": "...", "n_images": N]}
struct RasterMeta {
  std::string kind;  // "residual", "fingerprint", ...
  std::optional<std::string> device_id;
  std::optional<int> n_images;

  friend bool operator==(const RasterMeta&, const RasterMeta&) = default;
};

struct StoredRaster {
  GrayImage image;
  RasterMeta meta;
};

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path);

void save_raster(const std::filesystem::path& path, const GrayImage& img, const RasterMeta& meta);

// Throws kIo on missing files or a sidecar/payload size disagreement.
StoredRaster load_raster(const std::filesystem::path& path);

}  // namespace prnufm
