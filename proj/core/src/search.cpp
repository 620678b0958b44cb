#include "prnufm/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "prnufm/error.hpp"
#include "prnufm/parallel.hpp"

namespace prnufm {

using fft::ComplexF;

void GaConfig::validate() const {
  if (population < 4 || population % 2 != 0) {
    throw Error(ErrorCode::kInvalidConfig, "GA population must be even and at least 4");
  }
  if (max_iterations < 0) throw Error(ErrorCode::kInvalidConfig, "GA max_iterations must be >= 0");
  if (elite_count < 0 || elite_count >= population) {
    throw Error(ErrorCode::kInvalidConfig, "GA elite_count must lie in [0, population)");
  }
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(mutation_rate) || !rate_ok(crossover_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "GA rates must lie in [0, 1]");
  }
  if (tournament_size < 1) throw Error(ErrorCode::kInvalidConfig, "GA tournament_size must be >= 1");
  if (refine_steps < 0) throw Error(ErrorCode::kInvalidConfig, "refine_steps must be >= 0");
}

namespace {

int default_fft_size(int width, int height, const SearchRanges& ranges) {
  const double reach = std::max(std::abs(ranges.shift.lo), std::abs(ranges.shift.hi));
  const int need = std::max(width, height) + 2 * static_cast<int>(std::ceil(reach));
  return fft::next_power_of_two(std::max(need, 8));
}

}  // namespace

ReferenceTransform::ReferenceTransform(const GrayImage& fingerprint, const SearchRanges& ranges,
                                       const MellinConfig& cfg)
    : fingerprint_(fingerprint), ranges_(ranges) {
  ranges_.validate();
  fft_size_ = cfg.fft_size > 0 ? cfg.fft_size
                               : default_fft_size(fingerprint.width(), fingerprint.height(), ranges_);
  grid_ = LogPolarGrid::for_fft_size(fft_size_, cfg.grid);
  delta_rho_ = cfg.delta_rho > 0 ? cfg.delta_rho : grid_.rows_for_fraction(cfg.nominal_delta_rho);

  const Spectrum spec = fft2_padded(fingerprint_, fft_size_, Anchor::kCentered);
  if (spec.is_zero()) throw Error(ErrorCode::kDegenerateInput, "fingerprint spectrum is zero");
  if (cfg.crop_center) {
    crop_center_ = *cfg.crop_center;
  } else {
    crop_center_ = crop_center_from_fingerprint(log_polar_map(spec, grid_));
  }
  crop_offset_ = crop_window_offset(grid_, delta_rho_, crop_center_);
  band_ = mfm(spec, grid_, delta_rho_, crop_center_);
  correlator_ = std::make_shared<const LogPolarCorrelator>(band_, ranges_);
}

FitnessContext::FitnessContext(const GrayImage& residual, std::shared_ptr<const ReferenceTransform> reference)
    : reference_(std::move(reference)), residual_(residual) {
  if (!reference_) throw Error(ErrorCode::kInvalidArgument, "missing fingerprint transform");
  const ReferenceTransform& ref = *reference_;
  const int n = ref.fft_size();
  if (residual.width() > n || residual.height() > n) {
    throw Error(ErrorCode::kSizeTooSmall, "residual larger than the fingerprint FFT size");
  }
  band_ = mfm(fft2_padded(residual, n, Anchor::kCentered), ref.grid(), ref.delta_rho(), ref.crop_center());

  const LogPolarGrid& g = ref.grid();
  row_phase_.resize(band_.rows);
  for (int i = 0; i < band_.rows; ++i) {
    row_phase_[i] = static_cast<float>(2.0 * std::numbers::pi * g.radius(band_.crop_offset + i) / n);
  }
  cos_.resize(g.n_alpha);
  sin_.resize(g.n_alpha);
  for (int j = 0; j < g.n_alpha; ++j) {
    const double a = deg_to_rad(j * g.alpha_step());
    cos_[j] = static_cast<float>(std::cos(a));
    sin_[j] = static_cast<float>(std::sin(a));
  }
}

FitnessValue FitnessContext::evaluate(double cx, double cy) const {
  const LogPolarCorrelator& corr = reference_->correlator();
  const int na = band_.grid.n_alpha;
  const std::size_t filled = band_.data.size();
  thread_local std::vector<float> proj;
  thread_local fft::AlignedVector<ComplexF> work;
  proj.resize(na);
  work.resize(static_cast<std::size_t>(corr.padded_rows()) * na);
  std::fill(work.begin() + static_cast<std::ptrdiff_t>(filled), work.end(), ComplexF{});

  const auto fx = static_cast<float>(cx);
  const auto fy = static_cast<float>(cy);
  for (int j = 0; j < na; ++j) proj[j] = cos_[j] * fx + sin_[j] * fy;
  // W(x + c) has spectrum F_W(k) exp(+2 pi i k.c / N).
  for (int i = 0; i < band_.rows; ++i) {
    const float w = row_phase_[i];
    const ComplexF* src = band_.data.data() + static_cast<std::size_t>(i) * na;
    ComplexF* dst = work.data() + static_cast<std::size_t>(i) * na;
    for (int j = 0; j < na; ++j) {
      float s, c;
      fast_sincos(w * proj[j], s, c);
      dst[j] = mul(src[j], ComplexF(c, s));
    }
  }
  const ScaleRotation sr = corr.estimate_in_place(work);
  return {sr.peak, sr.scale, sr.angle};
}

FitnessValue fitness(int cx, int cy, const FitnessContext& ctx) {
  const Interval& shift = ctx.reference().ranges().shift;
  if (!shift.contains(cx) || !shift.contains(cy)) {
    throw Error(ErrorCode::kInvalidArgument,
                "shift (" + std::to_string(cx) + ", " + std::to_string(cy) + ") outside the search range");
  }
  return ctx.evaluate(cx, cy);
}

namespace {

using Gene = std::pair<int, int>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Memo {
 public:
  Memo(const FitnessContext& ctx, int threads) : ctx_(ctx), threads_(threads) {}

  // Evaluates every not-yet-seen gene of `pop`, concurrently, in first-seen order.
  void fill(const std::vector<Gene>& pop) {
    std::vector<Gene> todo;
    for (const Gene& g : pop) {
      if (!cache_.contains(g) && std::find(todo.begin(), todo.end(), g) == todo.end()) todo.push_back(g);
    }
    std::vector<FitnessValue> out(todo.size());
    parallel_for(todo.size(), threads_, [&](std::size_t i) { out[i] = fitness(todo[i].first, todo[i].second, ctx_); });
    for (std::size_t i = 0; i < todo.size(); ++i) cache_.emplace(todo[i], out[i]);
    evaluations_ += static_cast<int>(todo.size());
  }

  const FitnessValue& at(const Gene& g) const { return cache_.at(g); }
  int evaluations() const noexcept { return evaluations_; }

 private:
  const FitnessContext& ctx_;
  int threads_;
  std::map<Gene, FitnessValue> cache_;
  int evaluations_ = 0;
};

}  // namespace

AlignmentResult ga_search(const FitnessContext& ctx, const GaConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const Interval& shift = ctx.reference().ranges().shift;
  const int lo = static_cast<int>(std::ceil(shift.lo));
  const int hi = static_cast<int>(std::floor(shift.hi));
  if (lo > hi) throw Error(ErrorCode::kInvalidConfig, "shift range holds no integer");

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<int> any_shift(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int pop_size = cfg.population;

  std::vector<Gene> pop(pop_size);
  for (Gene& g : pop) {
    g.first = any_shift(rng);
    g.second = any_shift(rng);
  }

  Memo memo(ctx, cfg.threads);
  Gene best{};
  double best_value = -1e300;
  double initial_best = -1e300;
  std::vector<int> order(pop_size);

  for (int gen = 0;; ++gen) {
    memo.fill(pop);
    for (const Gene& g : pop) {
      const double v = memo.at(g).value;
      if (v > best_value) {
        best_value = v;
        best = g;
      }
      if (gen == 0) initial_best = std::max(initial_best, v);
    }
    if (gen == cfg.max_iterations) break;

    for (int i = 0; i < pop_size; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return memo.at(pop[a]).value > memo.at(pop[b]).value; });
    auto tournament = [&]() -> const Gene& {
      std::uniform_int_distribution<int> pick(0, pop_size - 1);
      int winner = pick(rng);
      for (int k = 1; k < cfg.tournament_size; ++k) {
        const int other = pick(rng);
        if (memo.at(pop[other]).value > memo.at(pop[winner]).value) winner = other;
      }
      return pop[winner];
    };
    auto mutate = [&](Gene& g) {
      if (coin(rng) < cfg.mutation_rate) g.first = any_shift(rng);
      if (coin(rng) < cfg.mutation_rate) g.second = any_shift(rng);
    };

    std::vector<Gene> next;
    next.reserve(pop_size);
    for (int e = 0; e < cfg.elite_count; ++e) next.push_back(pop[order[e]]);
    while (static_cast<int>(next.size()) < pop_size) {
      Gene a = tournament();
      Gene b = tournament();
      if (coin(rng) < cfg.crossover_rate) {
        if (coin(rng) < 0.5) std::swap(a.first, b.first);
        if (coin(rng) < 0.5) std::swap(a.second, b.second);
      }
      mutate(a);
      mutate(b);
      next.push_back(a);
      if (static_cast<int>(next.size()) < pop_size) next.push_back(b);
    }
    pop = std::move(next);
  }

  // The memo already holds the closed-form estimate at the winning shift,
  // so re-estimating there is a lookup.
  const FitnessValue& at_best = memo.at(best);
  const SearchRanges& ranges = ctx.reference().ranges();
  AlignmentResult out;
  out.params.scale = ranges.scale.clamp(at_best.scale);
  out.params.angle = ranges.angle.clamp(at_best.angle);
  out.params.shift_x = best.first;
  out.params.shift_y = best.second;
  out.fitness = at_best.value;
  out.evaluations = memo.evaluations();
  out.used_optimizer = true;
  out.initial_best_fitness = initial_best;
  out.low_confidence = out.fitness < cfg.confidence_floor;
  out.search_seconds = seconds_since(t0);
  out.elapsed = out.search_seconds;
  return out;
}

PceResult compensate_and_test(const GrayImage& residual, const GrayImage& fingerprint,
                              const SimilarityParams& params, const GrayImage* frame) {
  if (frame && !frame->same_shape(residual)) {
    throw Error(ErrorCode::kDimensionMismatch, "frame and residual differ in size");
  }
  GrayImage ref = warp(fingerprint, params.normalized(), residual.width(), residual.height());
  if (frame) {
    auto px = ref.pixels();
    const auto fr = frame->pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] *= fr[i];
  }
  return pce(residual, ref);
}

AlignmentResult align_known_shift(const FitnessContext& ctx, double shift_x, double shift_y,
                                  const GaConfig& cfg, const GrayImage* frame) {
  cfg.validate();
  const auto t0 = Clock::now();
  const SearchRanges& ranges = ctx.reference().ranges();
  const FitnessValue v = ctx.evaluate(shift_x, shift_y);
  AlignmentResult out;
  out.params = {ranges.scale.clamp(v.scale), ranges.angle.clamp(v.angle), shift_x, shift_y};
  out.fitness = v.value;
  out.initial_best_fitness = v.value;
  out.evaluations = 1;
  out.low_confidence = v.value < cfg.confidence_floor;
  out.search_seconds = seconds_since(t0);
  out.pce = compensate_and_test(ctx.residual(), ctx.reference().fingerprint(), out.params, frame);
  out.elapsed = seconds_since(t0);
  return out;
}

AlignmentResult align(const FitnessContext& ctx, const GaConfig& cfg, const GrayImage* frame) {
  const Interval& shift = ctx.reference().ranges().shift;
  if (shift.degenerate()) return align_known_shift(ctx, shift.lo, shift.lo, cfg, frame);
  const auto t0 = Clock::now();
  AlignmentResult out = ga_search(ctx, cfg);
  const GrayImage& k = ctx.reference().fingerprint();
  out.pce = compensate_and_test(ctx.residual(), k, out.params, frame);

  // The PCE plane peaks near whatever translation compensation left over.
  // Probe the 3x3 shifts around that point, re-estimating scale and angle
  // at each; keep the best only if it raises the search objective.
  const SearchRanges& ranges = ctx.reference().ranges();
  for (int step = 0; step < cfg.refine_steps; ++step) {
    const double px = out.params.shift_x + out.pce.peak_pos.dx;
    const double py = out.params.shift_y + out.pce.peak_pos.dy;
    std::vector<std::pair<double, double>> probes;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const std::pair<double, double> c{shift.clamp(px + dx), shift.clamp(py + dy)};
        if (c == std::pair{out.params.shift_x, out.params.shift_y}) continue;
        if (std::find(probes.begin(), probes.end(), c) == probes.end()) probes.push_back(c);
      }
    }
    std::vector<FitnessValue> values(probes.size());
    parallel_for(probes.size(), cfg.threads,
                 [&](std::size_t i) { values[i] = ctx.evaluate(probes[i].first, probes[i].second); });
    out.evaluations += static_cast<int>(probes.size());
    std::size_t best = probes.size();
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (values[i].value > out.fitness && (best == probes.size() || values[i].value > values[best].value)) best = i;
    }
    if (best == probes.size()) break;
    const FitnessValue& v = values[best];
    out.params = {ranges.scale.clamp(v.scale), ranges.angle.clamp(v.angle), probes[best].first, probes[best].second};
    out.fitness = v.value;
    out.pce = compensate_and_test(ctx.residual(), k, out.params, frame);
  }
  out.low_confidence = out.fitness < cfg.confidence_floor;
  out.elapsed = seconds_since(t0);
  return out;
}

AlignmentResult align(const GrayImage& residual, const GrayImage& fingerprint, const SearchRanges& ranges,
                      const GaConfig& cfg, const MellinConfig& mcfg, const GrayImage* frame) {
  const auto t0 = Clock::now();
  auto reference = std::make_shared<const ReferenceTransform>(fingerprint, ranges, mcfg);
  const FitnessContext ctx(residual, std::move(reference));
  const double transform_seconds = seconds_since(t0);
  AlignmentResult out = align(ctx, cfg, frame);
  out.transform_seconds = transform_seconds;
  out.elapsed = seconds_since(t0);
  return out;
}

FusedDecision fuse_frames(std::span<const PceResult> results) {
  if (results.empty()) throw Error(ErrorCode::kEmptyList, "no frame results to fuse");
  FusedDecision best{results[0].pce, 0};
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].pce > best.pce) best = {results[i].pce, i};
  }
  return best;
}

}  // namespace prnufm
