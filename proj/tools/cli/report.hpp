#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "prnufm/geometry.hpp"

namespace prnufm::cli {

struct Timings {
  double transform = 0.0;  // seconds
  double search = 0.0;
  double total = 0.0;

  friend bool operator==(const Timings&, const Timings&) = default;
};

// One line of `match` output. kind is "frame" for a per-frame result,
// "error" for a frame that could not be processed, and "fused" for the
// closing max-PCE record (frame_id then names the winning frame).
struct AttributionReport {
  std::string kind = "frame";
  std::string frame_id;
  std::string device_id;
  SimilarityParams params;
  double pce = 0.0;
  bool matched = false;
  double threshold = 60.0;
  double delta_rho = 800.0;  // samples on a nominal 2896-row rho axis
  int delta_rho_rows = 0;    // rows actually kept on this grid
  Timings timings;
  std::uint64_t seed = 0;
  int evaluations = 0;
  std::optional<std::string> error;

  friend bool operator==(const AttributionReport&, const AttributionReport&) = default;
};

void to_json(nlohmann::ordered_json& j, const AttributionReport& r);
void from_json(const nlohmann::ordered_json& j, AttributionReport& r);

std::string to_json_line(const AttributionReport& r);
AttributionReport parse_json_line(const std::string& line);

}  // namespace prnufm::cli
