#include "prnufm/fingerprint.hpp"

#include <optional>
#include <string>
#include <vector>

#include "prnufm/error.hpp"
#include "prnufm/parallel.hpp"

namespace prnufm {

Fingerprint estimate(std::span<const GrayImage> flats, const FingerprintOptions& opts,
                     std::string device_id) {
  if (flats.empty()) throw Error(ErrorCode::kTooFewImages, "fingerprint estimate needs >= 1 image");
  for (std::size_t i = 1; i < flats.size(); ++i) {
    if (!flats[i].same_shape(flats[0])) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "flat image " + std::to_string(i) + " is " + std::to_string(flats[i].width()) +
                      "x" + std::to_string(flats[i].height()) + ", expected " +
                      std::to_string(flats[0].width()) + "x" + std::to_string(flats[0].height()));
    }
  }
  const int w = flats[0].width();
  const int h = flats[0].height();

  std::vector<std::optional<NoiseResidual>> residuals(flats.size());
  parallel_for(flats.size(), opts.threads,
               [&](std::size_t i) { residuals[i] = extract(flats[i], opts.noise); });

  // Reduction in input order keeps the sum independent of thread count.
  std::vector<double> num(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> den(num.size(), 0.0);
  for (std::size_t i = 0; i < flats.size(); ++i) {
    const auto wi = residuals[i]->raster.pixels();
    const auto ii = flats[i].pixels();
    for (std::size_t p = 0; p < num.size(); ++p) {
      num[p] += wi[p] * ii[p];
      den[p] += ii[p] * ii[p];
    }
  }
  for (std::size_t p = 0; p < num.size(); ++p) num[p] = den[p] < 1e-6 ? 0.0 : num[p] / den[p];

  Fingerprint fp;
  fp.raster = postprocess(GrayImage(w, h, std::move(num))).raster;
  fp.n_images = static_cast<int>(flats.size());
  fp.device_id = std::move(device_id);
  return fp;
}

GrayImage scale_by_frame(const GrayImage& k, const GrayImage& frame) {
  require_same_shape(k, frame, "scale_by_frame");
  std::vector<double> out(k.size());
  const auto a = k.pixels();
  const auto b = frame.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return GrayImage(k.width(), k.height(), std::move(out));
}

GrayImage scale_by_frame(const Fingerprint& fp, const GrayImage& frame) {
  return scale_by_frame(fp.raster, frame);
}

}  // namespace prnufm
