#include "report.hpp"

namespace prnufm::cli {

void to_json(nlohmann::ordered_json& j, const AttributionReport& r) {
  j = nlohmann::ordered_json{
      {"kind", r.kind},
      {"frame_id", r.frame_id},
      {"device_id", r.device_id},
      {"scale", r.params.scale},
      {"angle", r.params.angle},
      {"cx", r.params.shift_x},
      {"cy", r.params.shift_y},
      {"pce", r.pce},
      {"decision", r.matched ? "matched" : "unmatched"},
      {"threshold", r.threshold},
      {"delta_rho", r.delta_rho},
      {"delta_rho_rows", r.delta_rho_rows},
      {"timings", {{"transform", r.timings.transform}, {"search", r.timings.search}, {"total", r.timings.total}}},
      {"seed", r.seed},
      {"evaluations", r.evaluations},
  };
  if (r.error) j["error"] = *r.error;
}

void from_json(const nlohmann::ordered_json& j, AttributionReport& r) {
  r.kind = j.at("kind").get<std::string>();
  r.frame_id = j.at("frame_id").get<std::string>();
  r.device_id = j.at("device_id").get<std::string>();
  r.params.scale = j.at("scale").get<double>();
  r.params.angle = j.at("angle").get<double>();
  r.params.shift_x = j.at("cx").get<double>();
  r.params.shift_y = j.at("cy").get<double>();
  r.pce = j.at("pce").get<double>();
  const auto decision = j.at("decision").get<std::string>();
  if (decision != "matched" && decision != "unmatched") {
    throw nlohmann::json::other_error::create(501, "decision must be matched or unmatched", &j);
  }
  r.matched = decision == "matched";
  r.threshold = j.at("threshold").get<double>();
  r.delta_rho = j.at("delta_rho").get<double>();
  r.delta_rho_rows = j.at("delta_rho_rows").get<int>();
  const auto& t = j.at("timings");
  r.timings = {t.at("transform").get<double>(), t.at("search").get<double>(), t.at("total").get<double>()};
  r.seed = j.at("seed").get<std::uint64_t>();
  r.evaluations = j.at("evaluations").get<int>();
  if (auto it = j.find("error"); it != j.end()) {
    r.error = it->get<std::string>();
  } else {
    r.error.reset();
  }
}

std::string to_json_line(const AttributionReport& r) {
  nlohmann::ordered_json j = r;
  return j.dump();
}

AttributionReport parse_json_line(const std::string& line) {
  return nlohmann::ordered_json::parse(line).get<AttributionReport>();
}

}  // namespace prnufm::cli
