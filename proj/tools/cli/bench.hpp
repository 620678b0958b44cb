#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prnufm/geometry.hpp"
#include "prnufm/noise.hpp"
#include "prnufm/search.hpp"

namespace prnufm::cli {

enum class BenchMode {
  kScaleRotation,  // shift-free warps, known-shift path only
  kFull,           // full similarity, known-shift and GA paths
};

std::string to_string(BenchMode mode);
BenchMode parse_bench_mode(const std::string& text);

struct BenchConfig {
  int trials = 10;
  int image_size = 512;
  SearchRanges ranges;
  std::vector<double> delta_rho{800.0};  // samples on a nominal 2896-row rho axis
  double pce_threshold = 60.0;
  std::vector<double> noise_levels{1.5};  // read-noise std, 0-255 scale
  double prnu_strength = 0.02;
  std::uint64_t rng_seed = 1;
  BenchMode mode = BenchMode::kScaleRotation;
  bool impostor = false;  // render frames with an independent device's pattern
  GaConfig ga;
  int threads = 1;  // concurrent trials

  // kInvalidConfig unless trials >= 1, threshold > 0, image_size >= 64,
  // both lists non-empty and every entry positive (noise may be zero).
  void validate() const;
};

// Deterministic per-trial seed stream.
std::uint64_t trial_seed(std::uint64_t base, int trial, int stream);

struct TrialInputs {
  GrayImage fingerprint;  // reference pattern K of the tested device
  GrayImage frame;        // warped frame the residual comes from
  NoiseResidual residual;
  SimilarityParams truth;
};

TrialInputs make_trial(const BenchConfig& cfg, int trial, double noise);

struct TrialRecord {
  int trial = 0;
  double noise = 0.0;
  double delta_rho = 0.0;
  int rows = 0;
  SimilarityParams truth;
  AlignmentResult known;               // closed form at the true shift
  std::optional<AlignmentResult> full;  // GA path (full mode)
  double transform_seconds = 0.0;
};

struct BenchResult {
  std::vector<TrialRecord> records;  // ordered by (trial, noise, delta_rho)
};

BenchResult run_bench(const BenchConfig& cfg);

// Timing-free per-trial table with a fixed header for the mode; identical
// bytes for identical (config, seed).
void write_csv(std::ostream& out, const BenchConfig& cfg, const BenchResult& result);
std::string csv_header(BenchMode mode);

// Aggregates per (noise, delta_rho): match rates, parameter-recovery rates
// and mean timings.
nlohmann::ordered_json summarize(const BenchConfig& cfg, const BenchResult& result);

}  // namespace prnufm::cli
