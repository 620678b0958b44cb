#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "prnufm/geometry.hpp"
#include "prnufm/image.hpp"
#include "prnufm/mellin.hpp"
#include "prnufm/spectral.hpp"

namespace prnufm {

struct GaConfig {
  int population = 50;
  int max_iterations = 50;
  double mutation_rate = 0.1;
  double crossover_rate = 0.8;
  int elite_count = 2;
  int tournament_size = 3;
  std::uint64_t rng_seed = 0;
  int threads = 1;               // concurrent fitness evaluations per generation
  double confidence_floor = 0.0;  // best fitness below this sets low_confidence
  int refine_steps = 3;  // PCE-guided shift polish rounds after the search (align only)

  // kInvalidConfig unless population >= 4 and even, elite_count <
  // population, rates in [0, 1], tournament_size >= 1 and refine_steps >= 0.
  void validate() const;
};

// How both terms are taken to the log-polar domain.
struct MellinConfig {
  int fft_size = 0;  // 0: smallest power of two >= max side + 2 * max |shift|
  LogPolarGrid::Options grid;
  int delta_rho = 0;  // rows kept; 0: derive from nominal_delta_rho
  double nominal_delta_rho = 800.0;  // same share of the rho axis as this many of 2896 rows
  std::optional<int> crop_center;  // grid row; default: fingerprint energy peak
};

// Fingerprint side of the transform, shared by every frame tested against
// the same fingerprint.
class ReferenceTransform {
 public:
  ReferenceTransform(const GrayImage& fingerprint, const SearchRanges& ranges, const MellinConfig& cfg);

  const LogPolarGrid& grid() const noexcept { return grid_; }
  int fft_size() const noexcept { return fft_size_; }
  int delta_rho() const noexcept { return delta_rho_; }
  int crop_center() const noexcept { return crop_center_; }
  int crop_offset() const noexcept { return crop_offset_; }
  const SearchRanges& ranges() const noexcept { return ranges_; }
  const LogPolarSpectrum& band() const noexcept { return band_; }
  const LogPolarCorrelator& correlator() const noexcept { return *correlator_; }
  const GrayImage& fingerprint() const noexcept { return fingerprint_; }

 private:
  GrayImage fingerprint_;
  SearchRanges ranges_;
  int fft_size_ = 0;
  LogPolarGrid grid_;
  int delta_rho_ = 0;
  int crop_center_ = 0;
  int crop_offset_ = 0;
  LogPolarSpectrum band_;
  std::shared_ptr<const LogPolarCorrelator> correlator_;
};

struct FitnessValue {
  double value = 0.0;  // log-polar phase-correlation peak
  double scale = 1.0;
  double angle = 0.0;
};

// Objective of the shift search. For a candidate translation c the residual
// is moved back by c (W(x + c)) and its cropped log-polar band correlated
// with the fingerprint band, so c is the translation of the similarity
// mapping the fingerprint onto the residual. The translation is applied as
// the exact Fourier phase ramp on W's cached band; evaluate() is
// thread-safe.
class FitnessContext {
 public:
  FitnessContext(const GrayImage& residual, std::shared_ptr<const ReferenceTransform> reference);

  FitnessValue evaluate(double cx, double cy) const;

  const ReferenceTransform& reference() const noexcept { return *reference_; }
  const LogPolarSpectrum& residual_band() const noexcept { return band_; }
  const GrayImage& residual() const noexcept { return residual_; }

 private:
  std::shared_ptr<const ReferenceTransform> reference_;
  GrayImage residual_;
  LogPolarSpectrum band_;
  std::vector<float> row_phase_;  // 2 pi r_i / N
  std::vector<float> cos_, sin_;
};

FitnessValue fitness(int cx, int cy, const FitnessContext& ctx);

struct AlignmentResult {
  SimilarityParams params;
  double fitness = 0.0;
  PceResult pce;
  int evaluations = 0;
  double elapsed = 0.0;          // seconds, search plus compensation
  double transform_seconds = 0.0;
  double search_seconds = 0.0;
  bool used_optimizer = false;
  bool low_confidence = false;
  double initial_best_fitness = 0.0;  // best fitness of the initial population
};

// Integer-coded genetic search over (cx, cy) in ranges.shift^2:
// tournament selection, uniform crossover, per-gene uniform mutation and
// elitism. Revisited shifts are served from a memo, so `evaluations`
// counts distinct fitness computations and never exceeds population *
// (max_iterations + 1). Deterministic for a given rng_seed and independent
// of cfg.threads. The PCE field is left empty.
AlignmentResult ga_search(const FitnessContext& ctx, const GaConfig& cfg);

// Full estimate: GA over the shift when the shift range is non-degenerate,
// otherwise a single closed-form evaluation at the known shift. Scale and
// angle are clamped into the ranges, and the result is compensated and
// PCE-tested (see compensate_and_test) against `frame` when given. After
// the GA, up to cfg.refine_steps times, the 3x3 shifts around the one
// implied by the PCE peak offset are evaluated; the best replaces the
// incumbent only when its fitness is higher. `evaluations` includes these
// extra calls.
AlignmentResult align(const FitnessContext& ctx, const GaConfig& cfg, const GrayImage* frame = nullptr);

// Known-shift path for a per-axis shift: one closed-form estimate at
// (shift_x, shift_y), no optimizer.
AlignmentResult align_known_shift(const FitnessContext& ctx, double shift_x, double shift_y,
                                  const GaConfig& cfg, const GrayImage* frame = nullptr);
AlignmentResult align(const GrayImage& residual, const GrayImage& fingerprint, const SearchRanges& ranges,
                      const GaConfig& cfg, const MellinConfig& mcfg = {}, const GrayImage* frame = nullptr);

// Warps the fingerprint by `params` onto the residual's raster, multiplies
// pixel-wise by `frame` when provided, and returns PCE(residual, .).
// Throws kDimensionMismatch if the frame and residual shapes differ.
PceResult compensate_and_test(const GrayImage& residual, const GrayImage& fingerprint,
                              const SimilarityParams& params, const GrayImage* frame = nullptr);

struct FusedDecision {
  double pce = 0.0;
  std::size_t index = 0;
};

// Maximum-PCE fusion over frames; throws kEmptyList on empty input.
FusedDecision fuse_frames(std::span<const PceResult> results);

}  // namespace prnufm
